use std::collections::{BTreeMap, BTreeSet};

use serde_json::{Map, Value};
use sheetstack::ingest::{parse_xlsx, CellValue, SheetFormat, SnapshotStore, WindowSize};
use sheetstack::insights::{Category, InsightFeed, FEED_SCHEMA_V1};
use sheetstack::personalize::{ConfigDefaults, UserConfig};
use sheetstack::pipeline::{analyze_window, generate_feed, AnalysisOptions, ScoredWindow};
use sheetstack::synth::{retail_corpus, RetailOptions};
use sheetstack::timeseries::Group;

fn retail_window() -> ScoredWindow {
    let store = SnapshotStore::in_memory();
    for s in retail_corpus(RetailOptions::default()) {
        store.ingest_snapshot("R1", &s.name, &s.csv, SheetFormat::Csv, None).unwrap();
    }
    analyze_window(&store.active_window("R1", WindowSize::Latest(10)).unwrap(), &AnalysisOptions::default())
}

fn config(user: &str) -> UserConfig {
    UserConfig::defaults(user, "R1", &ConfigDefaults::default())
}

/// Structural check of `value` against the subset of JSON Schema used by the feed schema.
fn conforms(value: &Value, schema: &Value, root: &Value, path: &str) -> Result<(), String> {
    if let Some(r) = schema.get("$ref").and_then(Value::as_str) {
        let name = r.trim_start_matches("#/$defs/");
        return conforms(value, &root["$defs"][name], root, path);
    }
    if let Some(options) = schema.get("oneOf").and_then(Value::as_array) {
        let ok = options.iter().filter(|s| conforms(value, s, root, path).is_ok()).count();
        return if ok == 1 { Ok(()) } else { Err(format!("{path}: {ok} oneOf branches match")) };
    }
    if let Some(c) = schema.get("const") {
        return if c == value { Ok(()) } else { Err(format!("{path}: expected {c}")) };
    }
    if let Some(e) = schema.get("enum").and_then(Value::as_array) {
        return if e.contains(value) { Ok(()) } else { Err(format!("{path}: {value} not in enum")) };
    }
    let types: Vec<&str> = match schema.get("type") {
        Some(Value::String(t)) => vec![t.as_str()],
        Some(Value::Array(ts)) => ts.iter().filter_map(Value::as_str).collect(),
        _ => vec![],
    };
    let type_ok = types.is_empty()
        || types.iter().any(|t| match *t {
            "object" => value.is_object(),
            "array" => value.is_array(),
            "string" => value.is_string(),
            "integer" => value.is_i64() || value.is_u64(),
            "number" => value.is_number(),
            "null" => value.is_null(),
            "boolean" => value.is_boolean(),
            _ => false,
        });
    if !type_ok {
        return Err(format!("{path}: {value} is not {types:?}"));
    }
    if let (Some(obj), Some(props)) = (value.as_object(), schema.get("properties").and_then(Value::as_object)) {
        for req in schema.get("required").and_then(Value::as_array).into_iter().flatten() {
            let req = req.as_str().unwrap();
            if !obj.contains_key(req) {
                return Err(format!("{path}: missing {req}"));
            }
        }
        for (k, v) in obj {
            match props.get(k) {
                Some(s) => conforms(v, s, root, &format!("{path}.{k}"))?,
                None if schema["additionalProperties"] == Value::Bool(false) => {
                    return Err(format!("{path}: unexpected key {k}"))
                }
                None => {}
            }
        }
    }
    if let (Some(items), Some(item_schema)) = (value.as_array(), schema.get("items")) {
        for (i, v) in items.iter().enumerate() {
            conforms(v, item_schema, root, &format!("{path}[{i}]"))?;
        }
    }
    Ok(())
}

#[test]
fn feed_conforms_to_schema() {
    let schema: Value = serde_json::from_str(FEED_SCHEMA_V1).unwrap();
    let scored = retail_window();
    let feed = generate_feed(&scored, "R1", &config("default"), 25);
    let categories: BTreeSet<Category> = feed.insights.iter().map(|i| i.category).collect();
    assert_eq!(categories.len(), 5, "fixture exercises every category: {categories:?}");
    let value: Value = serde_json::from_str(&feed.to_json()).unwrap();
    conforms(&value, &schema, &schema, "$").unwrap();

    let mut broken = value.clone();
    broken["insights"][0].as_object_mut().unwrap().remove("narrative");
    assert!(conforms(&broken, &schema, &schema, "$").is_err());
    let mut extra = value;
    extra.as_object_mut().unwrap().insert("surprise".into(), Value::Object(Map::new()));
    assert!(conforms(&extra, &schema, &schema, "$").is_err());
}

#[test]
fn feed_round_trips_byte_identical() {
    let feed = generate_feed(&retail_window(), "R1", &config("default"), 25);
    let json = feed.to_json();
    let back: InsightFeed = serde_json::from_str(&json).unwrap();
    assert_eq!(back.to_json(), json);
    assert_eq!(back, feed);
}

#[test]
fn one_highlight_per_group_and_distinct_picks() {
    let feed = generate_feed(&retail_window(), "R1", &config("default"), 25);
    for group in Group::ALL {
        let picks: Vec<&str> = feed
            .insights
            .iter()
            .filter(|i| i.group == Some(group))
            .filter(|i| matches!(i.category, Category::Highlight | Category::Trend | Category::Outlier))
            .map(|i| i.series_key.as_deref().unwrap())
            .collect();
        let highlights = feed
            .insights
            .iter()
            .filter(|i| i.group == Some(group) && i.category == Category::Highlight)
            .count();
        assert!(highlights <= 1);
        let distinct: BTreeSet<&&str> = picks.iter().collect();
        assert_eq!(distinct.len(), picks.len(), "{group}: {picks:?}");
    }
}

#[test]
fn sales_only_config_filters_and_keeps_stats() {
    let scored = retail_window();
    let mut ana = config("ana");
    ana.attribute_allowlist = Some(BTreeSet::from(["Sales".to_string()]));
    let filtered = generate_feed(&scored, "R1", &ana, 25);
    let default = generate_feed(&scored, "R1", &config("default"), 25);
    assert!(!filtered.insights.is_empty());
    for i in &filtered.insights {
        match i.group {
            Some(Group::Nts) => assert_eq!(i.attribute, "Sales"),
            Some(Group::Rts) => assert_eq!(i.attribute, "Sales-rank"),
            Some(Group::Cts) => panic!("no categorical is allowed: {}", i.attribute),
            None => assert_eq!(i.category, Category::Novelty),
        }
    }
    let stats_of = |feed: &InsightFeed| -> BTreeMap<String, String> {
        feed.insights
            .iter()
            .filter_map(|i| Some((i.series_key.clone()?, serde_json::to_string(&i.stats).unwrap())))
            .collect()
    };
    let (a, b) = (stats_of(&filtered), stats_of(&default));
    for (key, stats) in &a {
        if let Some(other) = b.get(key) {
            assert_eq!(stats, other, "{key} scored differently per user");
        }
    }
}

#[test]
fn novelty_reports_new_product_and_column() {
    let feed = generate_feed(&retail_window(), "R1", &config("default"), 25);
    let novelty = feed.insights.iter().find(|i| i.category == Category::Novelty).unwrap();
    let report = novelty.novelty.as_ref().unwrap();
    assert_eq!(report.new_keys, vec![vec!["P9999".to_string()]]);
    assert_eq!(report.new_attributes, vec!["Refunds".to_string()]);
    assert!(novelty.narrative.contains("P9999") && novelty.narrative.contains("Refunds"));
}

#[test]
fn short_series_appendix() {
    let scored = retail_window();
    let feed = generate_feed(&scored, "R1", &config("default"), 3);
    assert!(feed.short_series.len() <= 3);
    assert!(feed.short_series.windows(2).all(|w| w[0].variance >= w[1].variance));
    // P9999 and Refunds exist in one sheet only, so nothing there is long enough for stats.
    assert!(feed.short_series.iter().all(|s| s.n >= 2 && s.n <= 5));
}

#[test]
fn xlsx_snapshot_with_title_rows() {
    let mut workbook = rust_xlsxwriter::Workbook::new();
    let sheet = workbook.add_worksheet();
    sheet.write_string(0, 1, "Quarterly report").unwrap();
    let header = ["Product-ID", "Region", "Sales", "Open"];
    for (c, h) in header.iter().enumerate() {
        sheet.write_string(2, c as u16 + 1, *h).unwrap();
    }
    let rows = [("P1", "EU", 10.5, true), ("P2", "NA", 20.0, false), ("P3", "EU", 7.25, true)];
    for (r, (id, region, sales, open)) in rows.iter().enumerate() {
        let r = r as u32 + 3;
        sheet.write_string(r, 1, *id).unwrap();
        sheet.write_string(r, 2, *region).unwrap();
        sheet.write_number(r, 3, *sales).unwrap();
        sheet.write_boolean(r, 4, *open).unwrap();
    }
    let date = rust_xlsxwriter::ExcelDateTime::from_ymd(2020, 3, 1).unwrap();
    let format = rust_xlsxwriter::Format::new().set_num_format("yyyy-mm-dd");
    sheet.write_datetime_with_format(7, 1, &date, &format).unwrap();
    let bytes = workbook.save_to_buffer().unwrap();

    let grid = parse_xlsx(&bytes).unwrap();
    assert_eq!(grid.cell(0, 1), Some(&CellValue::Text("Quarterly report".into())));
    assert_eq!(grid.cell(3, 3), Some(&CellValue::Number(10.5)));
    assert_eq!(grid.cell(4, 4), Some(&CellValue::Boolean(false)));
    assert_eq!(grid.cell(7, 1), Some(&CellValue::Timestamp(1_583_020_800)));

    let store = SnapshotStore::in_memory();
    let snap = store
        .ingest_snapshot("Q", "q-2020-03-01.xlsx", &bytes, SheetFormat::Xlsx, None)
        .unwrap();
    assert_eq!(snap.timestamp, 1_583_020_800);
    let table = sheetstack::table_extract::extract_table(&snap.grid).unwrap();
    assert_eq!(table.header_row_index, 2);
    assert_eq!(table.dropped_leading_columns, 1);
    assert_eq!(table.header, header);
}
