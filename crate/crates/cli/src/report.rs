//! Stats and audit report documents.

use serde::{Deserialize, Serialize};
use tm_core::pipeline::{PageStats, UnsupportedContent};

pub const SCHEMA: &str = "tm-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Ok,
    Error,
}

/// One page. Counts are zero for failed rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteRow {
    pub url: String,
    pub status: RowStatus,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    pub node_count: usize,
    pub text_count: usize,
    pub image_count: usize,
    pub svg_count: usize,
    pub iframe_count: usize,
    pub batched: usize,
    pub pruned_fraction: f64,
    pub batch_count: usize,
    /// Wall-clock time; the only field that varies between identical runs.
    pub latency_ms: u64,
    pub backend_calls: u64,
    pub token_in_est: u64,
    pub token_out_est: u64,
    pub unsupported_content: bool,
    pub unsupported: UnsupportedContent,
}

impl SiteRow {
    pub fn ok(url: &str, stats: &PageStats) -> Self {
        Self {
            url: url.to_string(),
            status: RowStatus::Ok,
            error: None,
            node_count: stats.node_count,
            text_count: stats.text_count,
            image_count: stats.image_count,
            svg_count: stats.svg_count,
            iframe_count: stats.iframe_count,
            batched: stats.batched,
            pruned_fraction: stats.pruned_fraction,
            batch_count: stats.batch_count,
            latency_ms: stats.latency_ms,
            backend_calls: stats.backend_calls,
            token_in_est: stats.input_tokens_est,
            token_out_est: stats.output_tokens_est,
            unsupported_content: stats.unsupported.any(),
            unsupported: stats.unsupported,
        }
    }

    pub fn failed(url: &str, error: String) -> Self {
        Self {
            url: url.to_string(),
            status: RowStatus::Error,
            error: Some(error),
            node_count: 0,
            text_count: 0,
            image_count: 0,
            svg_count: 0,
            iframe_count: 0,
            batched: 0,
            pruned_fraction: 0.0,
            batch_count: 0,
            latency_ms: 0,
            backend_calls: 0,
            token_in_est: 0,
            token_out_est: 0,
            unsupported_content: false,
            unsupported: UnsupportedContent::default(),
        }
    }
}

/// Stats file written by `tm process`: one row tagged with the schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsDocument {
    pub schema: String,
    #[serde(flatten)]
    pub row: SiteRow,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub text_count: f64,
    pub image_count: f64,
    pub svg_count: f64,
    pub pruned_fraction: f64,
    pub latency_ms: f64,
    pub token_in_est: f64,
    pub token_out_est: f64,
}

impl Metrics {
    fn of(row: &SiteRow) -> Self {
        Self {
            text_count: row.text_count as f64,
            image_count: row.image_count as f64,
            svg_count: row.svg_count as f64,
            pruned_fraction: row.pruned_fraction,
            latency_ms: row.latency_ms as f64,
            token_in_est: row.token_in_est as f64,
            token_out_est: row.token_out_est as f64,
        }
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            text_count: f(self.text_count),
            image_count: f(self.image_count),
            svg_count: f(self.svg_count),
            pruned_fraction: f(self.pruned_fraction),
            latency_ms: f(self.latency_ms),
            token_in_est: f(self.token_in_est),
            token_out_est: f(self.token_out_est),
        }
    }

    fn zip(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            text_count: f(self.text_count, other.text_count),
            image_count: f(self.image_count, other.image_count),
            svg_count: f(self.svg_count, other.svg_count),
            pruned_fraction: f(self.pruned_fraction, other.pruned_fraction),
            latency_ms: f(self.latency_ms, other.latency_ms),
            token_in_est: f(self.token_in_est, other.token_in_est),
            token_out_est: f(self.token_out_est, other.token_out_est),
        }
    }
}

/// Mean and population standard deviation over the successful rows.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub sites: usize,
    pub ok: usize,
    pub failed: usize,
    pub unsupported_content: usize,
    pub mean: Metrics,
    pub stddev: Metrics,
}

impl Aggregate {
    pub fn from_rows(rows: &[SiteRow]) -> Self {
        let ok: Vec<Metrics> = rows.iter().filter(|r| r.status == RowStatus::Ok).map(Metrics::of).collect();
        let (mean, stddev) = if ok.is_empty() {
            (Metrics::default(), Metrics::default())
        } else {
            let n = ok.len() as f64;
            let sum = ok.iter().fold(Metrics::default(), |acc, m| acc.zip(m, |a, b| a + b));
            let mean = sum.map(|s| s / n);
            let sq = ok.iter().fold(Metrics::default(), |acc, m| acc.zip(&m.zip(&mean, |x, mu| (x - mu).powi(2)), |a, b| a + b));
            (mean, sq.map(|s| (s / n).sqrt()))
        };
        Self {
            sites: rows.len(),
            ok: ok.len(),
            failed: rows.len() - ok.len(),
            unsupported_content: rows.iter().filter(|r| r.unsupported_content).count(),
            mean,
            stddev,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub schema: String,
    pub task: String,
    pub rows: Vec<SiteRow>,
    pub aggregate: Aggregate,
}

impl AuditReport {
    pub fn new(task: &str, rows: Vec<SiteRow>) -> Self {
        let aggregate = Aggregate::from_rows(&rows);
        Self { schema: SCHEMA.to_string(), task: task.to_string(), rows, aggregate }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(text: usize, latency: u64, pruned: f64) -> SiteRow {
        SiteRow { text_count: text, latency_ms: latency, pruned_fraction: pruned, ..SiteRow::failed("u", String::new()) }
            .into_ok()
    }

    impl SiteRow {
        fn into_ok(mut self) -> Self {
            self.status = RowStatus::Ok;
            self.error = None;
            self
        }
    }

    #[test]
    fn aggregates_by_hand() {
        // text counts 10, 20, 60: mean 30, deviations -20 -10 30, variance 1400/3
        let rows = vec![row(10, 100, 0.5), row(20, 200, 0.25), row(60, 300, 0.0), SiteRow::failed("x", "boom".into())];
        let agg = Aggregate::from_rows(&rows);
        assert_eq!((agg.sites, agg.ok, agg.failed), (4, 3, 1));
        assert_eq!(agg.mean.text_count, 30.0);
        assert!((agg.stddev.text_count - (1400.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(agg.mean.latency_ms, 200.0);
        assert_eq!(agg.mean.pruned_fraction, 0.25);
    }

    #[test]
    fn no_rows() {
        let agg = Aggregate::from_rows(&[]);
        assert_eq!(agg.sites, 0);
        assert_eq!(agg.mean, Metrics::default());
    }

    #[test]
    fn stats_document_is_flat() {
        let doc = StatsDocument { schema: SCHEMA.into(), row: row(1, 2, 0.0) };
        let v = serde_json::to_value(&doc).unwrap();
        assert_eq!(v["schema"], SCHEMA);
        assert_eq!(v["text_count"], 1);
        assert!(v.get("error").is_none());
    }
}
