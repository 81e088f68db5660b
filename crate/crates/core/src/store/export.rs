use std::io::{self, Write};

use super::ProjectState;

fn clean(field: &str) -> String {
    field.replace(['\t', '\n', '\r'], " ")
}

/// `relation<TAB>arg1<TAB>arg2<TAB>arg3<TAB>docId<TAB>sentIndex`, one line
/// per instance.
pub fn write_instances_tsv<W: Write>(state: &ProjectState, out: &mut W) -> io::Result<()> {
    for inst in &state.instances {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            clean(&inst.relation.name()),
            clean(&inst.args.0),
            clean(&inst.args.1),
            clean(&inst.args.2),
            clean(&inst.doc_id),
            inst.sent_index
        )?;
    }
    Ok(())
}

/// `id<TAB>eventType<TAB>type1<TAB>verb<TAB>type2<TAB>connector<TAB>type3<TAB>status<TAB>roles`,
/// roles comma-separated and empty when unlabelled.
pub fn write_templates_tsv<W: Write>(state: &ProjectState, out: &mut W) -> io::Result<()> {
    for t in &state.templates {
        let roles = t.roles.as_ref().map(|r| r.join(",")).unwrap_or_default();
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            t.id,
            clean(&t.event_type),
            t.key.types[0],
            clean(&t.key.verb),
            t.key.types[1],
            clean(&t.key.connector_text()),
            t.key.types[2],
            t.status.as_str(),
            clean(&roles)
        )?;
    }
    Ok(())
}
