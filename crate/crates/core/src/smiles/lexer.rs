use crate::molgraph::{BondOrder, Element};

use super::SmilesError;

/// One lexical unit of a SMILES string. `pos` is the byte offset of the
/// token's first character, for error reporting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmilesToken {
    pub kind: TokenKind,
    pub pos: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Atom { element: Element, aromatic: bool },
    Bond(BondOrder),
    BranchOpen,
    BranchClose,
    /// Ring closure index 0..=99.
    Ring(u8),
}

/// Characters that are meaningful in full SMILES but outside our subset.
/// `-` is in this set on purpose: the explicit single bond only matters for
/// molecules the pipeline rejects anyway, and dropping it keeps charge
/// minus signs unrepresentable rather than silently misread.
const REJECTED: &[char] = &['+', '-', '.', '[', ']', '@', '/', '\\'];

/// Two-letter element symbols the lexer may greedily consume. `Sn` shadows
/// `S` + aromatic `n`; that reading can never occur in a valid molecule
/// because aromatic nitrogen has no free valence for the extra bond.
const TWO_LETTER: &[Element] = &[Element::Si, Element::Cl, Element::Br, Element::Sn];

pub fn tokenize(text: &str) -> Result<Vec<SmilesToken>, SmilesError> {
    // The dataset filter is a character scan for '+', '-', '.' anywhere in
    // the string, so those are reported first even when they sit inside a
    // bracket atom that would already fail on '['.
    if let Some((pos, ch)) = text
        .char_indices()
        .find(|&(_, c)| matches!(c, '+' | '-' | '.'))
    {
        return Err(SmilesError::RejectedFeature { ch, pos });
    }

    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();

    while let Some((pos, ch)) = chars.next() {
        let kind = match ch {
            '(' => TokenKind::BranchOpen,
            ')' => TokenKind::BranchClose,
            '=' => TokenKind::Bond(BondOrder::Double),
            '#' => TokenKind::Bond(BondOrder::Triple),
            ':' => TokenKind::Bond(BondOrder::Aromatic),
            '0'..='9' => TokenKind::Ring(ch as u8 - b'0'),
            '%' => {
                let mut digit = |what: &str| match chars.next() {
                    Some((_, d @ '0'..='9')) => Ok(d as u8 - b'0'),
                    _ => Err(SmilesError::Syntax {
                        pos,
                        message: format!("'%' must be followed by two digits ({what} missing)"),
                    }),
                };
                let hi = digit("first")?;
                let lo = digit("second")?;
                TokenKind::Ring(hi * 10 + lo)
            }
            c if REJECTED.contains(&c) => {
                return Err(SmilesError::RejectedFeature { ch: c, pos });
            }
            c if c.is_ascii_uppercase() => {
                let pair = chars
                    .peek()
                    .filter(|(_, l)| l.is_ascii_lowercase())
                    .map(|&(_, l)| format!("{c}{l}"));
                let two = pair
                    .as_deref()
                    .and_then(Element::from_symbol)
                    .filter(|e| TWO_LETTER.contains(e));
                if let Some(element) = two {
                    chars.next();
                    TokenKind::Atom {
                        element,
                        aromatic: false,
                    }
                } else if let Some(element) = Element::from_symbol(&c.to_string()) {
                    TokenKind::Atom {
                        element,
                        aromatic: false,
                    }
                } else {
                    // Prefer reporting the two-letter form when one is
                    // plausibly intended, e.g. "Zn".
                    return Err(SmilesError::UnsupportedElement {
                        symbol: pair.unwrap_or_else(|| c.to_string()),
                        pos,
                    });
                }
            }
            c if c.is_ascii_lowercase() => {
                let element = match c {
                    'b' => Element::B,
                    'c' => Element::C,
                    'n' => Element::N,
                    'o' => Element::O,
                    'p' => Element::P,
                    's' => Element::S,
                    _ => {
                        return Err(SmilesError::UnsupportedElement {
                            symbol: c.to_string(),
                            pos,
                        })
                    }
                };
                TokenKind::Atom {
                    element,
                    aromatic: true,
                }
            }
            c => {
                return Err(SmilesError::Syntax {
                    pos,
                    message: format!("unexpected character '{c}'"),
                });
            }
        };
        tokens.push(SmilesToken { kind, pos });
    }

    if tokens.is_empty() {
        return Err(SmilesError::Syntax {
            pos: 0,
            message: "empty input".into(),
        });
    }
    Ok(tokens)
}
