//! CSV ingestion and emission.
//!
//! One relation per file. The header names the attributes; two reserved
//! columns are recognised: `__id` (record id) and `__cost` (deletion cost).
//! A header cell may carry a kind annotation, `Name:num` or `Name:text`,
//! which overrides kind inference.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{CsvError, ModelError};
use crate::model::{Attribute, Database, Fact, RecordId, Schema, Signature, Value, ValueKind};

pub const ID_COLUMN: &str = "__id";
pub const COST_COLUMN: &str = "__cost";

#[derive(Debug, Clone, Default)]
pub struct CsvOptions {
    /// Target relation; defaults to the schema's only relation.
    pub relation: Option<String>,
    /// First id handed out when the file has no `__id` column.
    pub first_id: u64,
    /// Ignore the `__cost` column even when present.
    pub ignore_costs: bool,
}

struct Header {
    /// Position in the signature for each CSV column (None for reserved columns).
    columns: Vec<Column>,
}

#[derive(Clone, Copy)]
enum Column {
    Attr(usize),
    Id,
    Cost,
}

fn split_annotation(cell: &str) -> (&str, Option<ValueKind>) {
    if let Some((name, kind)) = cell.rsplit_once(':') {
        match kind.trim() {
            "num" | "numeric" => return (name.trim(), Some(ValueKind::Numeric)),
            "text" | "str" => return (name.trim(), Some(ValueKind::Text)),
            _ => {}
        }
    }
    (cell.trim(), None)
}

fn parse_number(s: &str) -> Option<f64> {
    let x: f64 = s.trim().parse().ok()?;
    x.is_finite().then_some(x)
}

fn parse_cell(raw: &str, kind: ValueKind) -> Option<Value> {
    match kind {
        ValueKind::Text => Some(Value::text(raw)),
        ValueKind::Numeric => parse_number(raw).map(Value::num),
    }
}

/// Reads the header and all records of a CSV source.
fn read_all<R: Read>(reader: R) -> Result<(Vec<String>, Vec<(usize, csv::StringRecord)>), CsvError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        records.push((line, rec));
    }
    Ok((header, records))
}

/// Infers a single-relation schema from CSV text: a column is numeric when every
/// value parses as a finite number (and there is at least one row).
pub fn infer_schema<R: Read>(reader: R, relation: &str) -> Result<Schema, CsvError> {
    let (header, records) = read_all(reader)?;
    infer_from_parts(&header, &records, relation)
}

fn infer_from_parts(
    header: &[String],
    records: &[(usize, csv::StringRecord)],
    relation: &str,
) -> Result<Schema, CsvError> {
    let mut attrs = Vec::new();
    for (col, cell) in header.iter().enumerate() {
        let (name, annotated) = split_annotation(cell);
        if name == ID_COLUMN || name == COST_COLUMN {
            continue;
        }
        if name.is_empty() {
            return Err(CsvError::Header(format!("column {} has an empty name", col + 1)));
        }
        let kind = annotated.unwrap_or_else(|| {
            let numeric = !records.is_empty()
                && records
                    .iter()
                    .all(|(_, r)| r.get(col).is_some_and(|v| parse_number(v).is_some()));
            if numeric {
                ValueKind::Numeric
            } else {
                ValueKind::Text
            }
        });
        attrs.push(Attribute::new(name, kind));
    }
    let sig = Signature::new(attrs).map_err(|e| CsvError::Header(e.to_string()))?;
    Ok(Schema::new().with_relation(relation, sig)?)
}

fn map_header(header: &[String], sig: &Signature) -> Result<Header, CsvError> {
    let mut columns = Vec::with_capacity(header.len());
    let mut seen = vec![false; sig.arity()];
    for cell in header {
        let (name, _) = split_annotation(cell);
        let col = match name {
            ID_COLUMN => Column::Id,
            COST_COLUMN => Column::Cost,
            _ => {
                let pos = sig
                    .position(name)
                    .ok_or_else(|| CsvError::Header(format!("unknown attribute `{name}`")))?;
                if seen[pos] {
                    return Err(CsvError::Header(format!("attribute `{name}` appears twice")));
                }
                seen[pos] = true;
                Column::Attr(pos)
            }
        };
        columns.push(col);
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(CsvError::Header(format!(
            "missing attribute `{}`",
            sig.attributes[missing].name
        )));
    }
    Ok(Header { columns })
}

fn target_relation<'a>(schema: &'a Schema, options: &'a CsvOptions) -> Result<&'a str, CsvError> {
    match &options.relation {
        Some(r) => Ok(r.as_str()),
        None => {
            let mut rels = schema.relations();
            match (rels.next(), rels.next()) {
                (Some((name, _)), None) => Ok(name),
                _ => Err(CsvError::Header(
                    "schema has several relations; name the target relation".into(),
                )),
            }
        }
    }
}

/// Parses CSV text into a database over `schema`.
pub fn read_csv<R: Read>(reader: R, schema: &Schema, options: &CsvOptions) -> Result<Database, CsvError> {
    let (header, records) = read_all(reader)?;
    build_database(&header, &records, schema.clone(), options)
}

fn build_database(
    header: &[String],
    records: &[(usize, csv::StringRecord)],
    schema: Schema,
    options: &CsvOptions,
) -> Result<Database, CsvError> {
    let relation = target_relation(&schema, options)?.to_owned();
    let sig = schema
        .relation(&relation)
        .ok_or_else(|| ModelError::UnknownRelation(relation.clone()))?
        .clone();
    let map = map_header(header, &sig)?;
    let has_id = map.columns.iter().any(|c| matches!(c, Column::Id));
    let mut db = Database::new(schema);
    for (n, (line, rec)) in records.iter().enumerate() {
        let row_err = |message: String| CsvError::Row { row: *line, message };
        if rec.len() != map.columns.len() {
            return Err(row_err(format!(
                "expected {} fields, found {}",
                map.columns.len(),
                rec.len()
            )));
        }
        let mut values: Vec<Option<Value>> = vec![None; sig.arity()];
        let mut id = RecordId(options.first_id + n as u64);
        let mut cost = None;
        for (col, raw) in map.columns.iter().zip(rec.iter()) {
            match *col {
                Column::Attr(pos) => {
                    let attr = &sig.attributes[pos];
                    let v = parse_cell(raw, attr.kind).ok_or_else(|| {
                        row_err(format!("`{raw}` is not a number (attribute {})", attr.name))
                    })?;
                    values[pos] = Some(v);
                }
                Column::Id => {
                    let parsed: u64 = raw
                        .trim()
                        .parse()
                        .map_err(|_| row_err(format!("`{raw}` is not a record id")))?;
                    id = RecordId(parsed);
                }
                Column::Cost => {
                    if options.ignore_costs || raw.trim().is_empty() {
                        continue;
                    }
                    let c = parse_number(raw).ok_or_else(|| row_err(format!("`{raw}` is not a cost")))?;
                    cost = Some(c);
                }
            }
        }
        let fact = Fact::new(relation.clone(), values.into_iter().map(|v| v.expect("all columns mapped")).collect());
        db.insert(id, fact).map_err(|e| match e {
            ModelError::DuplicateId(id) if has_id => row_err(format!("duplicate id {id}")),
            other => row_err(other.to_string()),
        })?;
        if let Some(c) = cost {
            db.set_cost(id, c).map_err(|e| row_err(e.to_string()))?;
        }
    }
    Ok(db)
}

pub fn load_csv(path: impl AsRef<Path>, schema: &Schema, options: &CsvOptions) -> Result<Database, CsvError> {
    read_csv(File::open(path)?, schema, options)
}

/// Loads a CSV file, inferring the schema. The relation is named after the file stem
/// unless `options.relation` is set.
pub fn load_csv_inferred(path: impl AsRef<Path>, options: &CsvOptions) -> Result<Database, CsvError> {
    let path = path.as_ref();
    let relation = options.relation.clone().unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "R".to_owned())
    });
    let (header, records) = read_all(File::open(path)?)?;
    let schema = infer_from_parts(&header, &records, &relation)?;
    let opts = CsvOptions {
        relation: Some(relation),
        ..options.clone()
    };
    build_database(&header, &records, schema, &opts)
}

/// Same as [`load_csv_inferred`] for in-memory text.
pub fn read_csv_inferred(text: &str, relation: &str, options: &CsvOptions) -> Result<Database, CsvError> {
    let (header, records) = read_all(text.as_bytes())?;
    let schema = infer_from_parts(&header, &records, relation)?;
    let opts = CsvOptions {
        relation: Some(relation.to_owned()),
        ..options.clone()
    };
    build_database(&header, &records, schema, &opts)
}

/// Writes the facts of one relation. Header cells are annotated only where kind
/// inference on the written data would otherwise pick the wrong kind.
pub fn write_relation<W: Write>(db: &Database, relation: &str, writer: W) -> Result<(), CsvError> {
    let sig = db
        .schema()
        .relation(relation)
        .ok_or_else(|| ModelError::UnknownRelation(relation.to_owned()))?;
    let ids = db.ids_of(relation);
    let with_costs = ids.iter().any(|id| db.explicit_cost(*id).is_some());
    let mut wtr = csv::Writer::from_writer(writer);

    let mut header = vec![ID_COLUMN.to_owned()];
    for (pos, attr) in sig.attributes.iter().enumerate() {
        let inferred_numeric = !ids.is_empty()
            && ids.iter().all(|id| {
                let v = &db.get(*id).expect("listed id").values[pos];
                match v {
                    Value::Num(_) => true,
                    Value::Text(s) => parse_number(s).is_some(),
                }
            });
        let inferred = if inferred_numeric { ValueKind::Numeric } else { ValueKind::Text };
        if inferred == attr.kind {
            header.push(attr.name.clone());
        } else {
            header.push(format!("{}:{}", attr.name, attr.kind));
        }
    }
    if with_costs {
        header.push(COST_COLUMN.to_owned());
    }
    wtr.write_record(&header)?;
    for id in ids {
        let fact = db.get(id).expect("listed id");
        let mut rec = vec![id.to_string()];
        rec.extend(fact.values.iter().map(ToString::to_string));
        if with_costs {
            rec.push(db.explicit_cost(id).map(|c| c.to_string()).unwrap_or_default());
        }
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Writes a single-relation database to `path`.
pub fn emit_csv(db: &Database, path: impl AsRef<Path>) -> Result<(), CsvError> {
    let relation = {
        let mut rels = db.schema().relations();
        match (rels.next(), rels.next()) {
            (Some((name, _)), None) => name.to_owned(),
            _ => {
                return Err(CsvError::Header(
                    "emit_csv writes exactly one relation; use write_relation".into(),
                ))
            }
        }
    };
    let file = File::create(path)?;
    write_relation(db, &relation, std::io::BufWriter::new(file))
}

/// Renders one relation as a CSV string.
pub fn relation_to_string(db: &Database, relation: &str) -> Result<String, CsvError> {
    let mut buf = Vec::new();
    write_relation(db, relation, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv writer emits utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn airport_schema() -> Schema {
        Schema::single("Airport", &["Name", "Country"], ValueKind::Text)
    }

    #[test]
    fn header_only_file_gives_empty_database() {
        let db = read_csv("Name,Country\n".as_bytes(), &airport_schema(), &CsvOptions::default()).unwrap();
        assert!(db.is_empty());
    }

    #[test]
    fn ids_default_to_file_order() {
        let db = read_csv("Name,Country\na,US\nb,US\n".as_bytes(), &airport_schema(), &CsvOptions::default())
            .unwrap();
        assert_eq!(db.ids().collect::<Vec<_>>(), vec![RecordId(0), RecordId(1)]);
    }

    #[test]
    fn cost_column_is_read_back() {
        let text = "Name,Country,__cost\na,US,2.0\nb,US,2.0\n";
        let db = read_csv(text.as_bytes(), &airport_schema(), &CsvOptions::default()).unwrap();
        assert!(db.ids().all(|id| db.cost_of(id) == 2.0));
    }

    #[test]
    fn duplicate_explicit_ids_are_rejected_with_row() {
        let text = "__id,Name,Country\n1,a,US\n1,b,US\n";
        let err = read_csv(text.as_bytes(), &airport_schema(), &CsvOptions::default()).unwrap_err();
        match err {
            CsvError::Row { row, message } => {
                assert_eq!(row, 3);
                assert!(message.contains("duplicate id"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_numeric_value_in_numeric_column() {
        let schema = Schema::single("R", &["A"], ValueKind::Numeric);
        let err = read_csv("A\n1\nx\n".as_bytes(), &schema, &CsvOptions::default()).unwrap_err();
        assert!(matches!(err, CsvError::Row { row: 3, .. }));
    }

    #[test]
    fn arity_mismatch_is_reported() {
        let err = read_csv("Name,Country\na\n".as_bytes(), &airport_schema(), &CsvOptions::default())
            .unwrap_err();
        assert!(matches!(err, CsvError::Row { row: 2, .. }));
    }

    #[test]
    fn inference_and_annotations() {
        let db = read_csv_inferred("Zip:text,Pop,Name\n02139,5,a\n10001,7,b\n", "City", &CsvOptions::default())
            .unwrap();
        let sig = db.schema().relation("City").unwrap();
        assert_eq!(sig.attributes[0].kind, ValueKind::Text);
        assert_eq!(sig.attributes[1].kind, ValueKind::Numeric);
        assert_eq!(sig.attributes[2].kind, ValueKind::Text);
        let out = relation_to_string(&db, "City").unwrap();
        assert!(out.starts_with("__id,Zip:text,Pop,Name\n"));
        let back = read_csv_inferred(&out, "City", &CsvOptions::default()).unwrap();
        assert_eq!(back, db);
    }

    #[test]
    fn empty_database_emits_header_only() {
        let db = Database::new(airport_schema());
        let out = relation_to_string(&db, "Airport").unwrap();
        assert_eq!(out, "__id,Name,Country\n");
    }
}
