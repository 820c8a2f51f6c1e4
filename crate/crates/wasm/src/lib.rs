//! Browser bindings: three interactive views over the operator engine.
//!
//! Each exported function takes plain scalars/strings and returns a JSON
//! string, so the page needs no framework — `www/index.html` fetches the
//! module, calls these, and draws on a canvas.
//!
//! Build with
//! `cargo build -p szasz2d-wasm --release --target wasm32-unknown-unknown`
//! followed by `wasm-bindgen --target web` (or `wasm-pack build --target
//! web crates/wasm`), then serve `crates/wasm/www/`.

use serde_json::{json, Map, Value};
use wasm_bindgen::prelude::*;

use szasz2d::analysis::{comparison_grid, error_table, voronovskaya_check, PointSource, TablePreset};
use szasz2d::operator::EvalConfig;
use szasz2d::{builtin, BivariateFn, OperatorParams};

fn parse_function(spec: &str) -> Result<BivariateFn, String> {
    let f = if let Some(name) = spec.strip_prefix("builtin:") {
        builtin(name)
    } else {
        BivariateFn::from_expr(spec)
    };
    f.map_err(|e| e.to_string())
}

/// Surface comparison: `f`, `Ŷf`, `Sf` and both errors over a grid.
pub fn compare_surface_json(
    f_spec: &str,
    m: u32,
    n: u32,
    a: f64,
    xmax: f64,
    ymax: f64,
    steps: usize,
) -> Result<String, String> {
    let f = parse_function(f_spec)?;
    let params = OperatorParams::new(m, n, a).map_err(|e| e.to_string())?;
    let cfg = EvalConfig::default();
    let grid = comparison_grid(&f, &params, xmax, ymax, steps, &cfg).map_err(|e| e.to_string())?;
    let points: Vec<Value> = grid
        .iter()
        .map(|r| {
            json!({
                "x": r.x, "y": r.y, "f": r.f,
                "yhat": r.yhat, "szasz": r.szasz,
                "error_yhat": r.err_yhat, "error_szasz": r.err_szasz,
            })
        })
        .collect();
    Ok(json!({
        "f": f.label(), "m": m, "n": n, "a": a,
        "xmax": xmax, "ymax": ymax, "steps": steps,
        "points": points,
    })
    .to_string())
}

/// Error-table preset (`"table1"` or `"table2"`); for table2 the
/// evaluation point is recovered and reported in the metadata.
pub fn error_table_json(preset: &str, a: f64) -> Result<String, String> {
    let preset: TablePreset = preset.parse().map_err(|e: szasz2d::Error| e.to_string())?;
    let cfg = EvalConfig::default();
    let table = error_table(preset, a, None, &cfg).map_err(|e| e.to_string())?;
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|r| {
            let mut obj = Map::new();
            obj.insert("x".into(), r.x.into());
            obj.insert("y".into(), r.y.into());
            obj.insert("m".into(), r.m.into());
            obj.insert("error_yhat".into(), r.error_yhat.into());
            if let Some(e) = r.error_szasz {
                obj.insert("error_szasz".into(), e.into());
            }
            Value::Object(obj)
        })
        .collect();
    let mut out = Map::new();
    out.insert("a".into(), a.into());
    out.insert("f".into(), table.f_label.clone().into());
    if let Some(((x, y), source)) = table.point {
        out.insert(
            "point".into(),
            json!({
                "x": x, "y": y,
                "source": match source {
                    PointSource::Provided => "provided",
                    PointSource::Recovered => "recovered",
                },
            }),
        );
    }
    out.insert("rows".into(), Value::Array(rows));
    Ok(Value::Object(out).to_string())
}

/// Voronovskaya study: the scaled sequence `m(Ŷf − f)`, its limit and the
/// empirical convergence order.
pub fn voronovskaya_json(
    f_spec: &str,
    x: f64,
    y: f64,
    a: f64,
    m_list_csv: &str,
) -> Result<String, String> {
    let f = parse_function(f_spec)?;
    let m_list: Vec<u32> = m_list_csv
        .split(',')
        .map(|tok| tok.trim().parse::<u32>().map_err(|_| format!("bad m value `{tok}`")))
        .collect::<Result<_, String>>()?;
    let cfg = EvalConfig::default();
    let study = voronovskaya_check(&f, x, y, a, &m_list, &cfg).map_err(|e| e.to_string())?;
    let records: Vec<Value> = study
        .records
        .iter()
        .map(|r| json!({ "m": r.m, "value": r.scaled, "residual": r.residual }))
        .collect();
    Ok(json!({
        "f": f.label(), "x": x, "y": y, "a": a,
        "limit": study.limit,
        "order": study.order,
        "records": records,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn compare_surface(
    f_spec: String,
    m: u32,
    n: u32,
    a: f64,
    xmax: f64,
    ymax: f64,
    steps: usize,
) -> Result<String, JsValue> {
    compare_surface_json(&f_spec, m, n, a, xmax, ymax, steps).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn table(preset: String, a: f64) -> Result<String, JsValue> {
    error_table_json(&preset, a).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn voronovskaya(
    f_spec: String,
    x: f64,
    y: f64,
    a: f64,
    m_list_csv: String,
) -> Result<String, JsValue> {
    voronovskaya_json(&f_spec, x, y, a, &m_list_csv).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn surface_json_shape() {
        let s = compare_surface_json("builtin:fig7", 10, 10, 1.32, 1.0, 1.0, 5).unwrap();
        let v: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["points"].as_array().unwrap().len(), 25);
        assert_eq!(v["f"], "y^2*exp(2*x)");
    }

    #[test]
    fn table_json_recovers_point() {
        let s = error_table_json("table2", 1.30).unwrap();
        let v: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["point"]["source"], "recovered");
        assert_eq!(v["rows"].as_array().unwrap().len(), 9);
    }

    #[test]
    fn voronovskaya_json_shape() {
        let s = voronovskaya_json("x^2+y^2", 0.5, 0.5, 1.32, "50,100,200").unwrap();
        let v: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["records"].as_array().unwrap().len(), 3);
        assert!(v["limit"].is_number());
    }

    #[test]
    fn bad_inputs_are_reported() {
        assert!(compare_surface_json("x +* y", 5, 5, 1.32, 1.0, 1.0, 5).is_err());
        assert!(error_table_json("table9", 1.32).is_err());
        assert!(voronovskaya_json("x*y", 0.5, 0.5, 1.32, "10,zz").is_err());
    }
}
