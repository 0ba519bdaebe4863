//! Saved-model files: a JSON envelope around a [`TrainedModel`].

use serde::{Deserialize, Serialize};
use serde_json::Value;
use trendcast_core::learners::TrainedModel;

use crate::error::AppError;

pub const FORMAT: &str = "trendcast-model";
pub const VERSION: u32 = 1;

#[derive(Serialize)]
struct EnvelopeOut<'a> {
    format: &'static str,
    version: u32,
    model: &'a TrainedModel,
}

#[derive(Deserialize)]
struct Header {
    format: String,
    version: u32,
}

pub fn encode(model: &TrainedModel) -> String {
    let env = EnvelopeOut {
        format: FORMAT,
        version: VERSION,
        model,
    };
    serde_json::to_string(&env).expect("model serializes")
}

/// Checks the format tag and version before decoding the model itself.
pub fn decode(text: &str) -> Result<TrainedModel, AppError> {
    let mut value: Value = serde_json::from_str(text).map_err(|e| AppError::Model(e.to_string()))?;
    let header: Header =
        serde_json::from_value(value.clone()).map_err(|e| AppError::Model(format!("bad envelope: {e}")))?;
    if header.format != FORMAT {
        return Err(AppError::Model(format!("not a {FORMAT} file (format `{}`)", header.format)));
    }
    if header.version != VERSION {
        return Err(AppError::Model(format!(
            "unsupported version {} (this build reads {VERSION})",
            header.version
        )));
    }
    let model = value
        .get_mut("model")
        .map(Value::take)
        .ok_or_else(|| AppError::Model("missing `model`".into()))?;
    serde_json::from_value(model).map_err(|e| AppError::Model(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use trendcast_core::features::FeatureMatrix;
    use trendcast_core::learners::{fit, preset};

    fn model() -> TrainedModel {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, (i * 7 % 5) as f64]).collect();
        let y: Vec<u8> = (0..20).map(|i| u8::from(i >= 10)).collect();
        let x = FeatureMatrix::from_rows(vec!["a".into(), "b".into()], &rows).unwrap();
        fit(&preset("logreg").unwrap(), &x, &y).unwrap()
    }

    #[test]
    fn round_trip_preserves_predictions() {
        let m = model();
        let back = decode(&encode(&m)).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn rejects_other_versions_and_formats() {
        let text = encode(&model());
        let bumped = text.replacen("\"version\":1", "\"version\":2", 1);
        assert!(matches!(decode(&bumped), Err(AppError::Model(m)) if m.contains("version 2")));
        let other = text.replacen(FORMAT, "something-else", 1);
        assert!(decode(&other).is_err());
        assert!(decode("{}").is_err());
    }
}
