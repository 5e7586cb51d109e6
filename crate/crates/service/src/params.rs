//! Query parsing with per-field error messages.

use std::collections::{BTreeMap, HashMap};

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use mdcontour::field::MlsVariant;
use mdcontour::pipeline::{check_resolution, DimSpec, RenderOptions, Spacing};
use mdcontour::render::RenderMode;
use serde_json::json;

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
    pub fields: BTreeMap<String, String>,
}

impl ApiError {
    pub fn new(status: StatusCode, message: impl Into<String>) -> ApiError {
        ApiError {
            status,
            message: message.into(),
            fields: BTreeMap::new(),
        }
    }

    pub fn field(field: &str, message: impl Into<String>) -> ApiError {
        let message = message.into();
        let mut fields = BTreeMap::new();
        fields.insert(field.to_string(), message.clone());
        ApiError {
            status: StatusCode::BAD_REQUEST,
            message,
            fields,
        }
    }

    fn from_fields(fields: BTreeMap<String, String>) -> ApiError {
        let message = fields
            .iter()
            .map(|(k, v)| format!("{k}: {v}"))
            .collect::<Vec<_>>()
            .join("; ");
        ApiError {
            status: StatusCode::BAD_REQUEST,
            message,
            fields,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (
            self.status,
            Json(json!({ "error": self.message, "fields": self.fields })),
        )
            .into_response()
    }
}

/// Collects every bad field before failing.
#[derive(Default)]
struct Errors(BTreeMap<String, String>);

impl Errors {
    fn take<T>(&mut self, name: &str, r: Result<T, String>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.0.insert(name.to_string(), e);
                None
            }
        }
    }
}

fn number<T: std::str::FromStr>(q: &HashMap<String, String>, name: &str) -> Option<Result<T, String>> {
    q.get(name).map(|s| {
        s.trim()
            .parse::<T>()
            .map_err(|_| format!("'{s}' is not a valid number"))
    })
}

fn flag(s: &str) -> Result<bool, String> {
    match s.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" | "" => Ok(false),
        _ => Err(format!("'{s}' is not a boolean")),
    }
}

pub fn relax(q: &HashMap<String, String>) -> Result<f64, ApiError> {
    match number::<f64>(q, "relax") {
        None => Ok(1.0),
        Some(Ok(t)) if (0.0..=1.0).contains(&t) => Ok(t),
        Some(Ok(t)) => Err(ApiError::field("relax", format!("must lie in [0, 1], got {t}"))),
        Some(Err(e)) => Err(ApiError::field("relax", e)),
    }
}

/// Parsed `GET /api/render.png` query.
#[derive(Debug)]
pub struct RenderQuery {
    pub dim: DimSpec,
    pub options: RenderOptions,
}

pub fn render_query(q: &HashMap<String, String>, default_dim: &str) -> Result<RenderQuery, ApiError> {
    let mut errs = Errors::default();
    let mut o = RenderOptions::default();

    let dim = errs.take(
        "dim",
        DimSpec::parse(q.get("dim").map(String::as_str).unwrap_or(default_dim)).map_err(|e| e.to_string()),
    );
    if let Some(v) = q.get("variant") {
        if let Some(v) = errs.take("variant", v.parse::<MlsVariant>()) {
            o.variant = v;
        }
    }
    if let Some(r) = number::<f64>(q, "alpha") {
        o.alpha = errs.take("alpha", r);
    }
    if let Some(r) = number::<f64>(q, "relax") {
        if let Some(t) = errs.take("relax", r) {
            o.relax = t;
        }
    }
    if let Some(m) = q.get("mode") {
        if let Some(m) = errs.take("mode", m.parse::<RenderMode>()) {
            o.mode = m;
        }
    }
    if let Some(s) = q.get("spacing") {
        if let Some(s) = errs.take("spacing", s.parse::<Spacing>()) {
            o.spacing = s;
        }
    }
    for (name, slot) in [("w", &mut o.width), ("h", &mut o.height)] {
        if let Some(r) = number::<usize>(q, name) {
            if let Some(v) = errs.take(name, r) {
                *slot = v;
            }
        }
    }
    if let Some(l) = q.get("legend") {
        o.legend = errs.take("legend", flag(l)).unwrap_or(false);
    }

    // Range checks only for fields that parsed.
    if !errs.0.contains_key("relax") && !(0.0..=1.0).contains(&o.relax) {
        errs.0.insert("relax".into(), format!("must lie in [0, 1], got {}", o.relax));
    }
    if !errs.0.contains_key("w") && !errs.0.contains_key("h") {
        if let Err(e) = check_resolution(o.width, o.height) {
            errs.0.insert("w".into(), e.clone());
            errs.0.insert("h".into(), e);
        }
    }
    if !errs.0.contains_key("alpha") && !errs.0.contains_key("variant") {
        if let Err(e) = o.mls_params().validate() {
            errs.0.insert("alpha".into(), e.to_string());
        }
    }
    match (errs.0.is_empty(), dim) {
        (true, Some(dim)) => Ok(RenderQuery { dim, options: o }),
        _ => Err(ApiError::from_fields(errs.0)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(pairs: &[(&str, &str)]) -> HashMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn defaults_and_overrides() {
        let r = render_query(&q(&[]), "mpg").unwrap();
        assert_eq!(r.dim, DimSpec::Column("mpg".into()));
        assert_eq!(r.options, RenderOptions::default());

        let r = render_query(
            &q(&[("dim", "a:b"), ("variant", "mean"), ("alpha", "2"), ("w", "50"), ("legend", "1")]),
            "mpg",
        )
        .unwrap();
        assert_eq!(r.dim, DimSpec::Pair("a".into(), "b".into()));
        assert_eq!(r.options.variant, MlsVariant::Mean);
        assert_eq!(r.options.alpha, Some(2.0));
        assert_eq!(r.options.width, 50);
        assert!(r.options.legend);
    }

    #[test]
    fn every_bad_field_is_reported() {
        let e = render_query(
            &q(&[("variant", "bogus"), ("relax", "2"), ("w", "0"), ("spacing", "-1"), ("mode", "x")]),
            "mpg",
        )
        .unwrap_err();
        assert_eq!(e.status, StatusCode::BAD_REQUEST);
        for f in ["variant", "relax", "w", "spacing", "mode"] {
            assert!(e.fields.contains_key(f), "{f}: {:?}", e.fields);
        }
        let e = render_query(&q(&[("alpha", "9")]), "mpg").unwrap_err();
        assert!(e.fields.contains_key("alpha"));
    }
}
