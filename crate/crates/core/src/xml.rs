//! Minimal canonical XML writer shared by the bundle serializer and the
//! document emitter. Attribute order is whatever the caller passes; callers
//! are responsible for passing it in canonical order.

use std::fmt::Write;

pub(crate) const DECLARATION: &str = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";

pub(crate) fn escape_attr(value: &str, out: &mut String) {
    for c in value.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' => out.push_str("&#9;"),
            c => out.push(c),
        }
    }
}

pub(crate) fn escape_text(value: &str, out: &mut String) {
    for c in value.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '\r' => out.push_str("&#13;"),
            c => out.push(c),
        }
    }
}

/// Indenting writer producing two-space nested elements.
pub(crate) struct XmlWriter {
    out: String,
    stack: Vec<String>,
    // true while the most recently opened tag is still missing its closing `>`
    pending: bool,
}

impl XmlWriter {
    pub(crate) fn new() -> Self {
        XmlWriter {
            out: String::from(DECLARATION),
            stack: Vec::new(),
            pending: false,
        }
    }

    fn settle(&mut self) {
        if self.pending {
            self.out.push_str(">\n");
            self.pending = false;
        }
    }

    fn indent(&mut self) {
        for _ in 0..self.stack.len() {
            self.out.push_str("  ");
        }
    }

    fn write_tag(&mut self, name: &str, attrs: &[(&str, &str)]) {
        self.settle();
        self.indent();
        self.out.push('<');
        self.out.push_str(name);
        for (key, value) in attrs {
            let _ = write!(self.out, " {key}=\"");
            escape_attr(value, &mut self.out);
            self.out.push('"');
        }
    }

    /// Opens an element; it is written self-closing if nothing is nested
    /// before the matching [`XmlWriter::close`].
    pub(crate) fn open(&mut self, name: &str, attrs: &[(&str, &str)]) {
        self.write_tag(name, attrs);
        self.stack.push(name.to_string());
        self.pending = true;
    }

    pub(crate) fn empty(&mut self, name: &str, attrs: &[(&str, &str)]) {
        self.write_tag(name, attrs);
        self.out.push_str("/>\n");
    }

    pub(crate) fn text_element(&mut self, name: &str, attrs: &[(&str, &str)], text: &str) {
        self.write_tag(name, attrs);
        self.out.push('>');
        escape_text(text, &mut self.out);
        let _ = writeln!(self.out, "</{name}>");
    }

    pub(crate) fn close(&mut self) {
        let name = self.stack.pop().expect("close without open");
        if self.pending {
            self.out.push_str("/>\n");
            self.pending = false;
        } else {
            self.indent();
            let _ = writeln!(self.out, "</{name}>");
        }
    }

    pub(crate) fn finish(mut self) -> String {
        while !self.stack.is_empty() {
            self.close();
        }
        self.out
    }
}
