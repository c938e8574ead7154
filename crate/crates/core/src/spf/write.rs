use std::io::{self, Write};

use super::{AttributeValue, InstanceGraph, SpfText};

/// Serializes a graph to ISO 10303-21 text.
pub fn write_spf(graph: &InstanceGraph) -> Vec<u8> {
    let mut out = Vec::with_capacity(graph.byte_size() as usize);
    write_spf_to(graph, &mut out).expect("writing to a Vec cannot fail");
    out
}

pub fn write_spf_to<W: Write>(graph: &InstanceGraph, out: &mut W) -> io::Result<()> {
    let mut out = io::BufWriter::new(out);
    let h = graph.header();
    let text = |s: &str| format!("'{}'", SpfText::from_logical(s).raw());
    let texts = |v: &[String]| {
        let items: Vec<String> = v.iter().map(|s| text(s)).collect();
        format!("({})", items.join(","))
    };
    writeln!(out, "ISO-10303-21;")?;
    writeln!(out, "HEADER;")?;
    writeln!(
        out,
        "FILE_DESCRIPTION({},{});",
        texts(&h.description),
        text(&h.implementation_level)
    )?;
    let f = &h.file_name;
    writeln!(
        out,
        "FILE_NAME({},{},{},{},{},{},{});",
        text(&f.name),
        text(&f.time_stamp),
        texts(&f.author),
        texts(&f.organization),
        text(&f.preprocessor_version),
        text(&f.originating_system),
        text(&f.authorization)
    )?;
    writeln!(out, "FILE_SCHEMA({});", texts(&h.file_schema))?;
    for record in &h.extra {
        write!(out, "{}(", record.name)?;
        write_params(&mut out, &record.parameters)?;
        writeln!(out, ");")?;
    }
    writeln!(out, "ENDSEC;")?;
    writeln!(out)?;
    writeln!(out, "DATA;")?;
    for inst in graph.instances() {
        write!(out, "#{}={}(", inst.id, inst.type_name)?;
        write_params(&mut out, &inst.attributes)?;
        writeln!(out, ");")?;
    }
    writeln!(out, "ENDSEC;")?;
    writeln!(out, "END-ISO-10303-21;")?;
    out.flush()
}

fn write_params<W: Write>(out: &mut W, params: &[AttributeValue]) -> io::Result<()> {
    for (i, p) in params.iter().enumerate() {
        if i > 0 {
            out.write_all(b",")?;
        }
        write_value(out, p)?;
    }
    Ok(())
}

fn write_value<W: Write>(out: &mut W, value: &AttributeValue) -> io::Result<()> {
    match value {
        AttributeValue::List(items) => {
            out.write_all(b"(")?;
            write_params(out, items)?;
            out.write_all(b")")
        }
        AttributeValue::Typed(t) => {
            write!(out, "{}(", t.type_name)?;
            write_value(out, &t.value)?;
            out.write_all(b")")
        }
        other => write!(out, "{other}"),
    }
}
