//! Tokenizer for the expression grammar.

/// Token category.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Number,
    Identifier,
    Operator,
    LeftParen,
    RightParen,
    Comma,
}

/// One lexeme with its byte offset into the source.
#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LexError {
    #[error("illegal character {character:?} at byte {position}")]
    IllegalCharacter { character: char, position: usize },
    #[error("malformed number at byte {position}")]
    MalformedNumber { position: usize },
}

/// Split a source string into tokens. Whitespace separates tokens and `#`
/// comments run to the end of the line; neither produces a token.
pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    if i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit() {
                        i += 1;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    } else {
                        return Err(LexError::MalformedNumber { position: start });
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    // Exponent only when digits follow; otherwise the `e`
                    // starts a separate identifier token.
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                // A dot immediately after a complete number (as in `1.2.3`)
                // is a malformed number, reported at the number's start.
                if i < bytes.len() && bytes[i] == b'.' {
                    return Err(LexError::MalformedNumber { position: start });
                }
                tokens.push(Token {
                    kind: TokenKind::Number,
                    lexeme: source[start..i].to_string(),
                    position: start,
                });
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                tokens.push(Token {
                    kind: TokenKind::Identifier,
                    lexeme: source[start..i].to_string(),
                    position: start,
                });
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                tokens.push(Token {
                    kind: TokenKind::Operator,
                    lexeme: (b as char).to_string(),
                    position: i,
                });
                i += 1;
            }
            b'(' => {
                tokens.push(Token {
                    kind: TokenKind::LeftParen,
                    lexeme: "(".to_string(),
                    position: i,
                });
                i += 1;
            }
            b')' => {
                tokens.push(Token {
                    kind: TokenKind::RightParen,
                    lexeme: ")".to_string(),
                    position: i,
                });
                i += 1;
            }
            b',' => {
                tokens.push(Token {
                    kind: TokenKind::Comma,
                    lexeme: ",".to_string(),
                    position: i,
                });
                i += 1;
            }
            _ => {
                let character = source[i..].chars().next().unwrap();
                return Err(LexError::IllegalCharacter {
                    character,
                    position: i,
                });
            }
        }
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_arithmetic() {
        let toks = tokenize("x + 2*y").unwrap();
        let kinds: Vec<_> = toks.iter().map(|t| t.kind).collect();
        assert_eq!(
            kinds,
            vec![
                TokenKind::Identifier,
                TokenKind::Operator,
                TokenKind::Number,
                TokenKind::Operator,
                TokenKind::Identifier
            ]
        );
        let lexemes: Vec<_> = toks.iter().map(|t| t.lexeme.as_str()).collect();
        assert_eq!(lexemes, vec!["x", "+", "2", "*", "y"]);
    }

    #[test]
    fn empty_source_gives_no_tokens() {
        assert!(tokenize("").unwrap().is_empty());
    }

    #[test]
    fn malformed_number_reports_start_offset() {
        assert_eq!(
            tokenize("1.2.3"),
            Err(LexError::MalformedNumber { position: 0 })
        );
        assert_eq!(
            tokenize("x + 4.5.6"),
            Err(LexError::MalformedNumber { position: 4 })
        );
    }

    #[test]
    fn trailing_dot_is_malformed() {
        assert_eq!(tokenize("1."), Err(LexError::MalformedNumber { position: 0 }));
    }

    #[test]
    fn positions_increase_and_cover_source() {
        let src = "sin(x1) ^ 2 # trailing comment";
        let toks = tokenize(src).unwrap();
        for pair in toks.windows(2) {
            assert!(pair[0].position < pair[1].position);
        }
        // Concatenated lexemes reproduce the source minus whitespace/comments.
        let joined: String = toks.iter().map(|t| t.lexeme.as_str()).collect();
        assert_eq!(joined, "sin(x1)^2");
    }

    #[test]
    fn scientific_notation() {
        let toks = tokenize("1.5e-3 2E+4 7e2").unwrap();
        let lexemes: Vec<_> = toks.iter().map(|t| t.lexeme.as_str()).collect();
        assert_eq!(lexemes, vec!["1.5e-3", "2E+4", "7e2"]);
    }

    #[test]
    fn exponent_without_digits_splits_identifier() {
        let toks = tokenize("2e").unwrap();
        assert_eq!(toks.len(), 2);
        assert_eq!(toks[0].kind, TokenKind::Number);
        assert_eq!(toks[1].kind, TokenKind::Identifier);
    }

    #[test]
    fn illegal_character() {
        assert_eq!(
            tokenize("x @ y"),
            Err(LexError::IllegalCharacter {
                character: '@',
                position: 2
            })
        );
    }
}
