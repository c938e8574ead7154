use std::collections::HashMap;
use std::sync::Arc;

use super::{
    AttributeValue, Diagnostic, EntityInstance, FileName, HeaderRecord, InstanceGraph, Real,
    SpfError, SpfHeader, SpfText, TypedValue,
};

const MAX_NESTING: usize = 128;

/// Reads an ISO 10303-21 file into an instance graph.
///
/// Fatal problems (missing sentinel, unterminated string, missing ENDSEC,
/// syntax errors) are returned as [`SpfError::MalformedFile`]; recoverable
/// ones end up in [`InstanceGraph::diagnostics`].
pub fn parse_spf(input: &[u8]) -> Result<InstanceGraph, SpfError> {
    let mut p = Parser {
        src: input,
        pos: 0,
        current_id: None,
        diagnostics: Vec::new(),
        names: HashMap::new(),
    };
    let (header, instances, index) = p.file()?;
    Ok(InstanceGraph::assemble(
        header,
        instances,
        index,
        input.len() as u64,
        p.diagnostics,
    ))
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    current_id: Option<u64>,
    diagnostics: Vec<Diagnostic>,
    names: HashMap<Box<[u8]>, Arc<str>>,
}

type ParseResult<T> = Result<T, SpfError>;

impl<'a> Parser<'a> {
    fn fail<T>(&self, reason: impl Into<String>) -> ParseResult<T> {
        let end = self.pos.min(self.src.len());
        let line = 1 + self.src[..end].iter().filter(|&&b| b == b'\n').count();
        Err(SpfError::MalformedFile {
            offset: self.pos,
            line,
            reason: reason.into(),
        })
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) -> ParseResult<()> {
        loop {
            match self.peek() {
                Some(b) if b.is_ascii_whitespace() => self.pos += 1,
                Some(b'/') if self.src.get(self.pos + 1) == Some(&b'*') => {
                    let start = self.pos;
                    self.pos += 2;
                    loop {
                        match self.src.get(self.pos..self.pos + 2) {
                            Some(b"*/") => {
                                self.pos += 2;
                                break;
                            }
                            Some(_) => self.pos += 1,
                            None => {
                                self.pos = start;
                                return self.fail("unterminated comment");
                            }
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn expect(&mut self, byte: u8) -> ParseResult<()> {
        self.skip_ws()?;
        if self.peek() == Some(byte) {
            self.pos += 1;
            Ok(())
        } else {
            self.fail(format!("expected '{}'", byte as char))
        }
    }

    /// Reads a keyword (letters, digits, underscore, hyphen), upper-cased.
    fn keyword(&mut self) -> ParseResult<&'a [u8]> {
        self.skip_ws()?;
        let start = self.pos;
        if !matches!(self.peek(), Some(b) if b.is_ascii_alphabetic() || b == b'!') {
            return self.fail("expected keyword");
        }
        self.pos += 1;
        while matches!(self.peek(), Some(b) if b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
        {
            self.pos += 1;
        }
        Ok(&self.src[start..self.pos])
    }

    fn intern(&mut self, raw: &[u8]) -> Arc<str> {
        if let Some(name) = self.names.get(raw) {
            return name.clone();
        }
        let upper = raw.to_ascii_uppercase();
        // Keywords are ASCII by construction.
        let name: Arc<str> = Arc::from(String::from_utf8_lossy(&upper).as_ref());
        self.names.insert(raw.into(), name.clone());
        name
    }

    fn expect_keyword(&mut self, word: &str) -> ParseResult<()> {
        let kw = self.keyword()?;
        if kw.eq_ignore_ascii_case(word.as_bytes()) {
            Ok(())
        } else {
            self.fail(format!("expected {word}"))
        }
    }

    fn file(&mut self) -> ParseResult<(SpfHeader, Vec<EntityInstance>, HashMap<u64, usize>)> {
        self.skip_ws()?;
        if !self.src[self.pos..].starts_with(b"ISO-10303-21") {
            return self.fail("missing ISO-10303-21 sentinel");
        }
        self.pos += b"ISO-10303-21".len();
        self.expect(b';')?;
        self.expect_keyword("HEADER")?;
        self.expect(b';')?;
        let header = self.header()?;
        self.expect_keyword("DATA")?;
        self.skip_ws()?;
        if self.peek() == Some(b'(') {
            return self.fail("parameterised DATA sections are not supported");
        }
        self.expect(b';')?;
        let (instances, index) = self.data()?;

        self.skip_ws()?;
        if self.pos >= self.src.len() {
            self.diagnostics.push(Diagnostic::MissingTerminator);
            return Ok((header, instances, index));
        }
        let kw = self.keyword()?;
        if kw.eq_ignore_ascii_case(b"DATA") {
            return self.fail("multiple DATA sections are not supported");
        }
        if !kw.eq_ignore_ascii_case(b"END-ISO-10303-21") {
            return self.fail("expected END-ISO-10303-21");
        }
        self.skip_ws()?;
        if self.peek() == Some(b';') {
            self.pos += 1;
        } else {
            self.diagnostics.push(Diagnostic::MissingTerminator);
        }
        Ok((header, instances, index))
    }

    fn header(&mut self) -> ParseResult<SpfHeader> {
        let mut header = SpfHeader {
            description: Vec::new(),
            implementation_level: String::new(),
            file_name: FileName::default(),
            file_schema: Vec::new(),
            extra: Vec::new(),
        };
        let mut seen = [false; 3];
        loop {
            self.skip_ws()?;
            if self.pos >= self.src.len() {
                return self.fail("missing ENDSEC after HEADER");
            }
            let kw = self.keyword()?;
            if kw.eq_ignore_ascii_case(b"ENDSEC") {
                self.expect(b';')?;
                break;
            }
            let name = String::from_utf8_lossy(kw).to_ascii_uppercase();
            self.expect(b'(')?;
            let params = self.parameters(b')', 0)?;
            self.expect(b';')?;
            let text = |i: usize| {
                params
                    .get(i)
                    .and_then(|v| v.as_text())
                    .unwrap_or_default()
                    .to_string()
            };
            let texts = |i: usize| -> Vec<String> {
                params
                    .get(i)
                    .and_then(|v| v.as_list())
                    .map(|l| {
                        l.iter()
                            .filter_map(|v| v.as_text())
                            .map(str::to_string)
                            .collect()
                    })
                    .unwrap_or_default()
            };
            match name.as_str() {
                "FILE_DESCRIPTION" => {
                    seen[0] = true;
                    header.description = texts(0);
                    header.implementation_level = text(1);
                }
                "FILE_NAME" => {
                    seen[1] = true;
                    header.file_name = FileName {
                        name: text(0),
                        time_stamp: text(1),
                        author: texts(2),
                        organization: texts(3),
                        preprocessor_version: text(4),
                        originating_system: text(5),
                        authorization: text(6),
                    };
                }
                "FILE_SCHEMA" => {
                    seen[2] = true;
                    header.file_schema = texts(0);
                }
                _ => header.extra.push(HeaderRecord {
                    name,
                    parameters: params,
                }),
            }
        }
        for (present, record) in seen
            .iter()
            .zip(["FILE_DESCRIPTION", "FILE_NAME", "FILE_SCHEMA"])
        {
            if !present {
                self.diagnostics.push(Diagnostic::MissingHeaderRecord {
                    record: record.to_string(),
                });
            }
        }
        Ok(header)
    }

    fn data(&mut self) -> ParseResult<(Vec<EntityInstance>, HashMap<u64, usize>)> {
        let mut instances: Vec<EntityInstance> = Vec::new();
        let mut index: HashMap<u64, usize> = HashMap::new();
        loop {
            self.skip_ws()?;
            match self.peek() {
                None => return self.fail("missing ENDSEC after DATA"),
                Some(b'#') => {
                    self.pos += 1;
                    let id = self.entity_id()?;
                    self.current_id = Some(id);
                    self.expect(b'=')?;
                    self.skip_ws()?;
                    if self.peek() == Some(b'(') {
                        return self.fail("complex entity instances are not supported");
                    }
                    let kw = self.keyword()?;
                    let type_name = self.intern(kw);
                    self.expect(b'(')?;
                    let attributes = self.parameters(b')', 0)?;
                    self.expect(b';')?;
                    let inst = EntityInstance {
                        id,
                        type_name,
                        attributes,
                    };
                    match index.get(&id) {
                        Some(&slot) => {
                            self.diagnostics
                                .push(Diagnostic::DuplicateInstanceId { id });
                            instances[slot] = inst;
                        }
                        None => {
                            index.insert(id, instances.len());
                            instances.push(inst);
                        }
                    }
                }
                Some(_) => {
                    let kw = self.keyword()?;
                    if kw.eq_ignore_ascii_case(b"ENDSEC") {
                        self.expect(b';')?;
                        self.current_id = None;
                        return Ok((instances, index));
                    }
                    return self.fail("expected instance or ENDSEC");
                }
            }
        }
    }

    fn entity_id(&mut self) -> ParseResult<u64> {
        let start = self.pos;
        while matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
            self.pos += 1;
        }
        let digits = &self.src[start..self.pos];
        let id = std::str::from_utf8(digits)
            .ok()
            .and_then(|s| s.parse::<u64>().ok());
        match id {
            Some(id) if id > 0 => Ok(id),
            _ => self.fail("expected positive instance id"),
        }
    }

    /// Comma-separated parameters up to (and consuming) `close`.
    fn parameters(&mut self, close: u8, depth: usize) -> ParseResult<Vec<AttributeValue>> {
        if depth > MAX_NESTING {
            return self.fail("parameter nesting too deep");
        }
        let mut out = Vec::new();
        self.skip_ws()?;
        if self.peek() == Some(close) {
            self.pos += 1;
            return Ok(out);
        }
        loop {
            out.push(self.parameter(depth)?);
            self.skip_ws()?;
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b) if b == close => {
                    self.pos += 1;
                    out.shrink_to_fit();
                    return Ok(out);
                }
                _ => return self.fail("expected ',' or ')'"),
            }
        }
    }

    fn parameter(&mut self, depth: usize) -> ParseResult<AttributeValue> {
        self.skip_ws()?;
        let Some(b) = self.peek() else {
            return self.fail("unexpected end of input");
        };
        match b {
            b'$' => {
                self.pos += 1;
                Ok(AttributeValue::Unset)
            }
            b'*' => {
                self.pos += 1;
                Ok(AttributeValue::Derived)
            }
            b'#' => {
                self.pos += 1;
                Ok(AttributeValue::Reference(self.entity_id()?))
            }
            b'\'' => self.string(),
            b'"' => {
                self.pos += 1;
                let start = self.pos;
                while matches!(self.peek(), Some(b) if b.is_ascii_hexdigit()) {
                    self.pos += 1;
                }
                let digits = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
                self.expect(b'"')?;
                Ok(AttributeValue::Binary(digits.into()))
            }
            b'(' => {
                self.pos += 1;
                Ok(AttributeValue::List(self.parameters(b')', depth + 1)?))
            }
            b'.' if matches!(self.src.get(self.pos + 1), Some(c) if c.is_ascii_alphabetic() || *c == b'_') =>
            {
                self.pos += 1;
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                    self.pos += 1;
                }
                let token =
                    String::from_utf8_lossy(&self.src[start..self.pos]).to_ascii_uppercase();
                if self.peek() != Some(b'.') {
                    return self.fail("unterminated enumeration");
                }
                self.pos += 1;
                Ok(AttributeValue::Enum(token.into()))
            }
            b'+' | b'-' | b'.' | b'0'..=b'9' => self.number(),
            b if b.is_ascii_alphabetic() => {
                let kw = self.keyword()?;
                let type_name = self.intern(kw);
                self.expect(b'(')?;
                let mut inner = self.parameters(b')', depth + 1)?;
                if inner.len() != 1 {
                    return self.fail("typed parameter must wrap exactly one value");
                }
                let value = inner.pop().expect("length checked");
                Ok(AttributeValue::Typed(Box::new(TypedValue {
                    type_name,
                    value,
                })))
            }
            _ => self.fail(format!("unexpected character {:?}", b as char)),
        }
    }

    fn number(&mut self) -> ParseResult<AttributeValue> {
        let start = self.pos;
        if matches!(self.peek(), Some(b'+' | b'-')) {
            self.pos += 1;
        }
        let mut digits = 0;
        let mut is_real = false;
        while let Some(c) = self.peek() {
            match c {
                b'0'..=b'9' => digits += 1,
                b'.' => is_real = true,
                b'E' | b'e' => {
                    is_real = true;
                    if matches!(self.src.get(self.pos + 1), Some(b'+' | b'-')) {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
            self.pos += 1;
        }
        if digits == 0 {
            return self.fail("malformed number");
        }
        // Number lexemes are ASCII.
        let lexeme = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
        if !is_real {
            if let Ok(v) = lexeme.parse::<i64>() {
                return Ok(AttributeValue::Integer(v));
            }
            self.diagnostics.push(Diagnostic::IntegerOverflow {
                id: self.current_id.unwrap_or(0),
                lexeme: lexeme.to_string(),
            });
        }
        match lexeme.parse::<f64>() {
            Ok(v) => Ok(AttributeValue::Real(Real::with_lexeme(v, lexeme))),
            Err(_) => self.fail(format!("malformed number {lexeme:?}")),
        }
    }

    fn string(&mut self) -> ParseResult<AttributeValue> {
        let open = self.pos;
        self.pos += 1;
        let start = self.pos;
        loop {
            match self.peek() {
                None => {
                    self.pos = open;
                    return self.fail("unterminated string");
                }
                Some(b'\'') if self.src.get(self.pos + 1) == Some(&b'\'') => self.pos += 2,
                Some(b'\'') => break,
                Some(_) => self.pos += 1,
            }
        }
        let bytes = &self.src[start..self.pos];
        self.pos += 1;
        let raw = match std::str::from_utf8(bytes) {
            Ok(s) => std::borrow::Cow::Borrowed(s),
            // ISO 8859-1 baseline
            Err(_) => std::borrow::Cow::Owned(bytes.iter().map(|&b| b as char).collect()),
        };
        let (text, unknown) = SpfText::from_raw(&raw);
        for escape in unknown {
            self.diagnostics.push(Diagnostic::UnknownEscape {
                id: self.current_id,
                escape,
            });
        }
        Ok(AttributeValue::Text(Box::new(text)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spf::NotFound;

    fn wrap(data: &str) -> String {
        format!(
            "ISO-10303-21;\nHEADER;\nFILE_DESCRIPTION(('d'),'2;1');\nFILE_NAME('n','t',('a'),('o'),'p','s','z');\nFILE_SCHEMA(('IFC4'));\nENDSEC;\nDATA;\n{data}\nENDSEC;\nEND-ISO-10303-21;\n"
        )
    }

    #[test]
    fn minimal_building() {
        let g = parse_spf(wrap("#1=IFCBUILDING($,$,'B',$,$,$,$,$,$,$,$,$);").as_bytes()).unwrap();
        assert_eq!(g.len(), 1);
        let b = g.resolve(1).unwrap();
        assert!(b.is("IFCBUILDING"));
        assert_eq!(b.attributes.len(), 12);
        assert_eq!(b.attr(2).unwrap().as_text(), Some("B"));
        assert_eq!(g.header().file_schema, vec!["IFC4".to_string()]);
        assert_eq!(g.header().file_name.author, vec!["a".to_string()]);
        assert!(g.diagnostics().is_empty());
    }

    #[test]
    fn zero_point() {
        let g = parse_spf(wrap("#2=IFCCARTESIANPOINT((0.,0.,0.));").as_bytes()).unwrap();
        let p = g.resolve(2).unwrap();
        assert_eq!(p.attributes.len(), 1);
        let list = p.attr(0).unwrap().as_list().unwrap();
        assert_eq!(list.len(), 3);
        for v in list {
            assert!(matches!(v, AttributeValue::Real(r) if r.value() == 0.0));
        }
    }

    #[test]
    fn value_kinds() {
        let g = parse_spf(
            wrap("#1=X(-7,1.5E-3,.T.,.NOTDEFINED.,$,*,\"0FF\",IFCLABEL('x'),(#1,()),'a''b',/* c */ 2.);")
                .as_bytes(),
        )
        .unwrap();
        let a = &g.resolve(1).unwrap().attributes;
        assert_eq!(a[0], AttributeValue::Integer(-7));
        assert_eq!(a[1].as_f64(), Some(1.5e-3));
        assert_eq!(a[2].as_enum(), Some("T"));
        assert_eq!(a[3].as_enum(), Some("NOTDEFINED"));
        assert!(a[4].is_unset());
        assert_eq!(a[5], AttributeValue::Derived);
        assert_eq!(a[6], AttributeValue::Binary("0FF".into()));
        assert_eq!(a[7].as_typed().unwrap().type_name.as_ref(), "IFCLABEL");
        assert_eq!(a[8].as_list().unwrap().len(), 2);
        assert_eq!(a[9].as_text(), Some("a'b"));
        assert_eq!(a[10].as_f64(), Some(2.0));
    }

    #[test]
    fn duplicate_ids_keep_last() {
        let g = parse_spf(wrap("#1=A(1);#1=B(2);").as_bytes()).unwrap();
        assert_eq!(g.len(), 1);
        assert!(g.resolve(1).unwrap().is("B"));
        assert_eq!(
            g.diagnostics(),
            &[Diagnostic::DuplicateInstanceId { id: 1 }]
        );
    }

    #[test]
    fn dangling_references_are_reported() {
        let g = parse_spf(wrap("#1=A(#7);").as_bytes()).unwrap();
        assert_eq!(
            g.diagnostics(),
            &[Diagnostic::DanglingReference { from: 1, to: 7 }]
        );
        assert_eq!(g.resolve(7), Err(NotFound(7)));
    }

    #[test]
    fn unknown_escape_is_a_diagnostic() {
        let g = parse_spf(wrap("#1=A('x\\Qy');").as_bytes()).unwrap();
        assert_eq!(
            g.resolve(1).unwrap().attr(0).unwrap().as_text(),
            Some("x\\Qy")
        );
        assert!(matches!(
            g.diagnostics()[0],
            Diagnostic::UnknownEscape { id: Some(1), .. }
        ));
    }

    #[test]
    fn fatal_errors() {
        let cases = [
            "HEADER;ENDSEC;DATA;ENDSEC;".to_string(),
            wrap("#1=A('open);"),
            "ISO-10303-21;HEADER;ENDSEC;DATA;#1=A(1);".to_string(),
            wrap("#1=A(1);ENDSEC;DATA;#2=B();"),
            wrap("#1=(A(1)B(2));"),
            wrap("#0=A();"),
            wrap(&format!("#1=A({}1{});", "(".repeat(500), ")".repeat(500))),
        ];
        for case in cases {
            assert!(
                matches!(
                    parse_spf(case.as_bytes()),
                    Err(SpfError::MalformedFile { .. })
                ),
                "{case}"
            );
        }
    }

    #[test]
    fn missing_terminator_is_recoverable() {
        let g = parse_spf(b"ISO-10303-21;HEADER;ENDSEC;DATA;#1=A(1);ENDSEC;").unwrap();
        assert!(g.diagnostics().contains(&Diagnostic::MissingTerminator));
    }

    #[test]
    fn latin1_bytes_are_accepted() {
        let mut text = wrap("#1=A('X');").into_bytes();
        let at = text.iter().position(|&b| b == b'X').unwrap();
        text[at] = 0xE9;
        let g = parse_spf(&text).unwrap();
        assert_eq!(g.resolve(1).unwrap().attr(0).unwrap().as_text(), Some("é"));
    }
}
