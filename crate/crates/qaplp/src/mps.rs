//! Fixed-format MPS export and import for [`SparseModel`].
//!
//! Values are printed with Rust's shortest-roundtrip float formatting, so
//! a write/parse cycle reproduces every coefficient bit-exactly. Names
//! longer than a classic 8-character MPS field are written in full with a
//! single space separating overflowing fields; any reader that tokenizes
//! on whitespace (including this one) handles such files.

use std::collections::HashMap;

use crate::model::{Row, RowFamily, SparseModel};
use crate::{Error, Result};

const OBJECTIVE_ROW: &str = "COST";

/// Classic field start positions (0-based) for the section body lines.
const FIELD_STARTS: [usize; 6] = [1, 4, 14, 24, 39, 49];

fn put_field(line: &mut String, field: usize, text: &str) {
    let start = FIELD_STARTS[field];
    if line.len() < start {
        line.push_str(&" ".repeat(start - line.len()));
    } else if !line.is_empty() {
        line.push(' ');
    }
    line.push_str(text);
}

fn fmt_value(v: f64) -> String {
    format!("{v}")
}

/// Render `model` as an MPS document.
pub fn write_mps(model: &SparseModel) -> String {
    let mut out = String::new();
    out.push_str(&format!("NAME          {}\n", model.name));

    out.push_str("ROWS\n");
    {
        let mut line = String::new();
        put_field(&mut line, 0, "N");
        put_field(&mut line, 1, OBJECTIVE_ROW);
        out.push_str(&line);
        out.push('\n');
    }
    for row in &model.rows {
        let mut line = String::new();
        put_field(&mut line, 0, "E");
        put_field(&mut line, 1, &row.name);
        out.push_str(&line);
        out.push('\n');
    }

    // transpose to column-major entry lists
    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.num_cols()];
    for (ri, row) in model.rows.iter().enumerate() {
        for &(c, v) in &row.entries {
            by_col[c].push((ri, v));
        }
    }

    out.push_str("COLUMNS\n");
    for (c, entries) in by_col.iter().enumerate() {
        let name = &model.col_names[c];
        let mut pending: Vec<(&str, f64)> = Vec::new();
        if model.cost[c] != 0.0 {
            pending.push((OBJECTIVE_ROW, model.cost[c]));
        }
        for &(ri, v) in entries {
            pending.push((model.rows[ri].name.as_str(), v));
        }
        if pending.is_empty() {
            // keep columns outside every row declared
            pending.push((OBJECTIVE_ROW, 0.0));
        }
        for chunk in pending.chunks(2) {
            let mut line = String::new();
            put_field(&mut line, 1, name);
            put_field(&mut line, 2, chunk[0].0);
            put_field(&mut line, 3, &fmt_value(chunk[0].1));
            if let Some(&(rname, v)) = chunk.get(1) {
                put_field(&mut line, 4, rname);
                put_field(&mut line, 5, &fmt_value(v));
            }
            out.push_str(&line);
            out.push('\n');
        }
    }

    out.push_str("RHS\n");
    let mut pending: Vec<(&str, f64)> = Vec::new();
    for row in &model.rows {
        if row.rhs != 0.0 {
            pending.push((row.name.as_str(), row.rhs));
        }
    }
    for chunk in pending.chunks(2) {
        let mut line = String::new();
        put_field(&mut line, 1, "RHS");
        put_field(&mut line, 2, chunk[0].0);
        put_field(&mut line, 3, &fmt_value(chunk[0].1));
        if let Some(&(rname, v)) = chunk.get(1) {
            put_field(&mut line, 4, rname);
            put_field(&mut line, 5, &fmt_value(v));
        }
        out.push_str(&line);
        out.push('\n');
    }

    out.push_str("ENDATA\n");
    out
}

#[derive(PartialEq)]
enum Section {
    None,
    Rows,
    Columns,
    Rhs,
    Bounds,
    Ranges,
    Done,
}

/// Parse an MPS document into a [`SparseModel`]. Columns appear in order
/// of first mention; only `N` and `E` row types are accepted (all
/// constraints in this model are equalities).
pub fn parse_mps(text: &str) -> Result<SparseModel> {
    let mut name = String::new();
    let mut section = Section::None;
    let mut row_order: Vec<String> = Vec::new();
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut col_names: Vec<String> = Vec::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut cost: Vec<f64> = Vec::new();
    let mut entries: Vec<Vec<(usize, f64)>> = Vec::new(); // row-major
    let mut rhs: Vec<f64> = Vec::new();

    let parse_num = |tok: &str| -> Result<f64> {
        tok.parse::<f64>()
            .map_err(|_| Error::Parse(format!("bad numeric field '{tok}'")))
    };

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim_end();
        if line.is_empty() || line.starts_with('*') {
            continue;
        }
        let indented = line.starts_with(' ') || line.starts_with('\t');
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if !indented {
            match toks[0] {
                "NAME" => {
                    name = toks.get(1).unwrap_or(&"").to_string();
                    continue;
                }
                "ROWS" => {
                    section = Section::Rows;
                    continue;
                }
                "COLUMNS" => {
                    section = Section::Columns;
                    continue;
                }
                "RHS" => {
                    section = Section::Rhs;
                    continue;
                }
                "BOUNDS" => {
                    section = Section::Bounds;
                    continue;
                }
                "RANGES" => {
                    section = Section::Ranges;
                    continue;
                }
                "ENDATA" => {
                    section = Section::Done;
                    break;
                }
                other => {
                    return Err(Error::Parse(format!("line {}: unknown section '{other}'", lineno + 1)))
                }
            }
        }
        match section {
            Section::Rows => {
                if toks.len() != 2 {
                    return Err(Error::Parse(format!("line {}: malformed row line", lineno + 1)));
                }
                match toks[0] {
                    "N" => {
                        // objective row; only one supported
                    }
                    "E" => {
                        let rname = toks[1].to_string();
                        if row_index.insert(rname.clone(), row_order.len()).is_some() {
                            return Err(Error::Parse(format!("duplicate row '{rname}'")));
                        }
                        row_order.push(rname);
                        entries.push(Vec::new());
                        rhs.push(0.0);
                    }
                    t => {
                        return Err(Error::Parse(format!(
                            "line {}: unsupported row type '{t}'",
                            lineno + 1
                        )))
                    }
                }
            }
            Section::Columns => {
                if toks.len() != 3 && toks.len() != 5 {
                    return Err(Error::Parse(format!("line {}: malformed column line", lineno + 1)));
                }
                let cname = toks[0];
                let col = *col_index.entry(cname.to_string()).or_insert_with(|| {
                    col_names.push(cname.to_string());
                    cost.push(0.0);
                    col_names.len() - 1
                });
                for pair in toks[1..].chunks(2) {
                    let v = parse_num(pair[1])?;
                    if pair[0] == OBJECTIVE_ROW {
                        cost[col] = v;
                    } else {
                        let ri = *row_index
                            .get(pair[0])
                            .ok_or_else(|| Error::Parse(format!("unknown row '{}'", pair[0])))?;
                        entries[ri].push((col, v));
                    }
                }
            }
            Section::Rhs => {
                if toks.len() != 3 && toks.len() != 5 {
                    return Err(Error::Parse(format!("line {}: malformed rhs line", lineno + 1)));
                }
                for pair in toks[1..].chunks(2) {
                    if pair[0] == OBJECTIVE_ROW {
                        continue;
                    }
                    let ri = *row_index
                        .get(pair[0])
                        .ok_or_else(|| Error::Parse(format!("unknown rhs row '{}'", pair[0])))?;
                    rhs[ri] = parse_num(pair[1])?;
                }
            }
            Section::Bounds | Section::Ranges => {
                return Err(Error::Parse(format!(
                    "line {}: bounds/ranges sections are not used by this model",
                    lineno + 1
                )));
            }
            Section::None | Section::Done => {
                return Err(Error::Parse(format!("line {}: data outside any section", lineno + 1)));
            }
        }
    }
    if section != Section::Done {
        return Err(Error::Parse("missing ENDATA".into()));
    }

    let rows: Vec<Row> = row_order
        .into_iter()
        .zip(entries)
        .zip(rhs)
        .map(|((rname, mut ent), rhs)| {
            ent.sort_unstable_by_key(|&(c, _)| c);
            Row {
                family: RowFamily::from_name(&rname),
                name: rname,
                entries: ent,
                rhs,
            }
        })
        .collect();

    Ok(SparseModel {
        name,
        col_names,
        cost,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indexer::VariableSpace;
    use crate::instance::{CostMode, QapInstance};
    use crate::model::{build_model, BuildOptions};

    fn sample_model(n: usize, seed: u64) -> SparseModel {
        let inst = QapInstance::generate_random(n, CostMode::WithOpcost, seed, false).unwrap();
        let space = VariableSpace::build(n).unwrap();
        build_model(&inst, &space, BuildOptions::default()).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        for n in [2usize, 3, 4] {
            let model = sample_model(n, 11);
            let text = write_mps(&model);
            let back = parse_mps(&text).unwrap();
            assert_eq!(model, back, "n={n}");
        }
    }

    #[test]
    fn round_trip_preserves_awkward_values() {
        let mut model = sample_model(3, 5);
        model.cost[0] = 0.1 + 0.2; // not exactly 0.3
        model.cost[1] = 1.0 / 3.0;
        model.rows[0].entries[0].1 = -1e-17;
        let back = parse_mps(&write_mps(&model)).unwrap();
        assert_eq!(model, back);
    }

    #[test]
    fn short_names_land_on_classic_field_starts() {
        let model = sample_model(3, 1);
        let text = write_mps(&model);
        let rhs_line = text
            .lines()
            .skip_while(|l| *l != "RHS")
            .nth(1)
            .unwrap();
        assert_eq!(&rhs_line[4..7], "RHS");
        assert_eq!(&rhs_line[14..16], "F1");
        assert_eq!(rhs_line.as_bytes()[24] as char, '1');
    }

    #[test]
    fn sections_in_order() {
        let model = sample_model(3, 2);
        let text = write_mps(&model);
        let idx = |s: &str| text.find(&format!("\n{s}\n")).or(text.find(&format!("{s}\n"))).unwrap();
        assert!(idx("ROWS") < idx("COLUMNS"));
        assert!(idx("COLUMNS") < idx("RHS"));
        assert!(idx("RHS") < idx("ENDATA"));
    }

    #[test]
    fn rejects_truncated_and_garbled_input() {
        let model = sample_model(3, 3);
        let text = write_mps(&model);
        let cut = &text[..text.len() - 8];
        assert!(parse_mps(cut).is_err());
        assert!(parse_mps("NAME x\nROWS\n Q F1\nENDATA\n").is_err());
        assert!(parse_mps("junk\n").is_err());
    }

    #[test]
    fn zero_objective_columns_are_still_declared() {
        // triple variables cost nothing but must survive the round trip
        let model = sample_model(4, 7);
        let back = parse_mps(&write_mps(&model)).unwrap();
        assert_eq!(back.col_names, model.col_names);
    }
}
