//! Forgiving parser for the structured key/value documents chat models
//! produce.
//!
//! Model replies wrap the payload in a fenced block and routinely bend YAML
//! rules (list-item fields at the wrong indent, stray prose around the
//! block, unquoted strings). This parser extracts the first fenced block,
//! falls back to the whole reply when no fence is present, and reads the
//! line-oriented structure without demanding valid YAML.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DocError {
    #[error("no structured block found")]
    NoBlock,
    #[error("malformed structured block: {0}")]
    Malformed(String),
}

/// Key/value tree extracted from a model reply.
#[derive(Debug, Clone, PartialEq)]
pub enum DocNode {
    Scalar(String),
    List(Vec<DocNode>),
    Map(Vec<(String, DocNode)>),
}

impl DocNode {
    pub fn get(&self, key: &str) -> Option<&DocNode> {
        match self {
            DocNode::Map(entries) => entries.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            DocNode::Scalar(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[DocNode]> {
        match self {
            DocNode::List(items) => Some(items),
            _ => None,
        }
    }

    /// Scalar string for `key`, if present.
    pub fn str_field(&self, key: &str) -> Option<&str> {
        self.get(key).and_then(|n| n.as_str())
    }

    /// Boolean field; accepts "true"/"false" with trailing commentary.
    pub fn bool_field(&self, key: &str) -> Option<bool> {
        let raw = self.str_field(key)?.trim().to_ascii_lowercase();
        if raw == "true" || raw.starts_with("true ") || raw.starts_with("true/") {
            Some(true)
        } else if raw == "false" || raw.starts_with("false ") || raw.starts_with("false/") {
            Some(false)
        } else {
            None
        }
    }

    /// String field where "None"/"null"/empty mean absent.
    pub fn opt_str_field(&self, key: &str) -> Option<&str> {
        let raw = self.str_field(key)?.trim();
        match raw.to_ascii_lowercase().as_str() {
            "" | "none" | "null" | "~" => None,
            _ => Some(raw),
        }
    }
}

/// Extracts and parses the first fenced block of `raw`; when no fence is
/// present the entire text is parsed. Leading/trailing prose is tolerated,
/// list order is preserved.
pub fn parse_structured_block(raw: &str) -> Result<DocNode, DocError> {
    if raw.trim().is_empty() {
        return Err(DocError::NoBlock);
    }
    let body = extract_fenced(raw).unwrap_or(raw);
    let lines: Vec<Line> = body.lines().filter_map(Line::significant).collect();
    if lines.is_empty() {
        return Err(DocError::NoBlock);
    }
    let mut cursor = 0;
    let node = parse_block(&lines, &mut cursor, 0);
    match node {
        Some(node) if !is_empty(&node) => Ok(node),
        _ => Err(DocError::Malformed("no key/value content".to_string())),
    }
}

/// Content of the first ``` fence, ignoring an optional language tag.
fn extract_fenced(raw: &str) -> Option<&str> {
    let open = raw.find("```")?;
    let after_tag = raw[open + 3..].find('\n')? + open + 4;
    let close_rel = raw[after_tag..].find("```")?;
    Some(&raw[after_tag..after_tag + close_rel])
}

fn is_empty(node: &DocNode) -> bool {
    match node {
        DocNode::Scalar(s) => s.is_empty(),
        DocNode::List(items) => items.is_empty(),
        DocNode::Map(entries) => entries.is_empty(),
    }
}

struct Line<'a> {
    indent: usize,
    content: &'a str,
}

impl<'a> Line<'a> {
    fn significant(raw: &'a str) -> Option<Line<'a>> {
        let trimmed = raw.trim_end();
        let content = trimmed.trim_start();
        if content.is_empty() {
            return None;
        }
        Some(Line {
            indent: trimmed.len() - content.len(),
            content,
        })
    }

    fn is_list_item(&self) -> bool {
        self.content == "-" || self.content.starts_with("- ")
    }

    fn item_rest(&self) -> &'a str {
        self.content.trim_start_matches('-').trim_start()
    }

    /// Splits "key: value" when the key looks like an identifier phrase.
    fn key_value(&self) -> Option<(&'a str, &'a str)> {
        split_key_value(self.content)
    }
}

fn split_key_value(content: &str) -> Option<(&str, &str)> {
    let colon = content.find(':')?;
    let key = content[..colon].trim();
    if key.is_empty()
        || !key
            .chars()
            .all(|c| c.is_alphanumeric() || c == '_' || c == '-' || c == ' ')
    {
        return None;
    }
    let value = content[colon + 1..].trim();
    Some((key, value))
}

fn clean_scalar(raw: &str) -> String {
    let trimmed = raw.trim();
    for quote in ['"', '\''] {
        if trimmed.len() >= 2 && trimmed.starts_with(quote) && trimmed.ends_with(quote) {
            return trimmed[1..trimmed.len() - 1].to_string();
        }
    }
    trimmed.to_string()
}

fn parse_block(lines: &[Line], cursor: &mut usize, min_indent: usize) -> Option<DocNode> {
    let first = lines.get(*cursor)?;
    if first.indent < min_indent {
        return None;
    }
    if first.is_list_item() {
        Some(parse_list(lines, cursor, first.indent))
    } else {
        Some(parse_map(lines, cursor, min_indent))
    }
}

fn parse_map(lines: &[Line], cursor: &mut usize, min_indent: usize) -> DocNode {
    let mut entries: Vec<(String, DocNode)> = Vec::new();
    while let Some(line) = lines.get(*cursor) {
        if line.indent < min_indent || line.is_list_item() {
            break;
        }
        let Some((key, value)) = line.key_value() else {
            // Prose line inside the block; skip it.
            *cursor += 1;
            continue;
        };
        let own_indent = line.indent;
        *cursor += 1;
        if !value.is_empty() {
            entries.push((key.to_string(), DocNode::Scalar(clean_scalar(value))));
            continue;
        }
        // Empty value: a nested block follows when the next line is deeper,
        // or is a list item at the same or deeper indent.
        let nested = match lines.get(*cursor) {
            Some(next) if next.indent > own_indent => parse_block(lines, cursor, own_indent + 1),
            Some(next) if next.is_list_item() && next.indent >= own_indent => {
                Some(parse_list(lines, cursor, next.indent))
            }
            _ => None,
        };
        entries.push((
            key.to_string(),
            nested.unwrap_or(DocNode::Scalar(String::new())),
        ));
    }
    DocNode::Map(entries)
}

fn parse_list(lines: &[Line], cursor: &mut usize, base_indent: usize) -> DocNode {
    let mut items: Vec<DocNode> = Vec::new();
    while let Some(line) = lines.get(*cursor) {
        if !line.is_list_item() || line.indent != base_indent {
            break;
        }
        let rest = line.item_rest();
        if let Some((key, value)) = split_key_value(rest) {
            // The item is a map whose first entry sits on the dash line.
            let mut entries: Vec<(String, DocNode)> = Vec::new();
            *cursor += 1;
            if value.is_empty() {
                let nested = match lines.get(*cursor) {
                    Some(next) if next.indent > base_indent && !next.is_list_item() => {
                        parse_block(lines, cursor, base_indent + 1)
                    }
                    Some(next) if next.is_list_item() && next.indent > base_indent => {
                        Some(parse_list(lines, cursor, next.indent))
                    }
                    _ => None,
                };
                entries.push((
                    key.to_string(),
                    nested.unwrap_or(DocNode::Scalar(String::new())),
                ));
            } else {
                entries.push((key.to_string(), DocNode::Scalar(clean_scalar(value))));
            }
            // Follow-up fields: models emit them either indented under the
            // item or flush with the dash; accept both until the next item
            // at this level or a dedent below it.
            while let Some(next) = lines.get(*cursor) {
                if next.indent < base_indent {
                    break;
                }
                if next.is_list_item() {
                    break;
                }
                let Some((k, v)) = next.key_value() else {
                    *cursor += 1;
                    continue;
                };
                let field_indent = next.indent;
                *cursor += 1;
                if v.is_empty() {
                    let nested = match lines.get(*cursor) {
                        Some(peek) if peek.indent > field_indent => {
                            parse_block(lines, cursor, field_indent + 1)
                        }
                        Some(peek) if peek.is_list_item() && peek.indent >= field_indent => {
                            Some(parse_list(lines, cursor, peek.indent))
                        }
                        _ => None,
                    };
                    entries.push((
                        k.to_string(),
                        nested.unwrap_or(DocNode::Scalar(String::new())),
                    ));
                } else {
                    entries.push((k.to_string(), DocNode::Scalar(clean_scalar(v))));
                }
            }
            items.push(DocNode::Map(entries));
        } else {
            items.push(DocNode::Scalar(clean_scalar(rest)));
            *cursor += 1;
        }
    }
    DocNode::List(items)
}
