use serde::Serialize;

/// Per-iteration solver log: a fixed column schema and one row per iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveTrace {
    pub columns: Vec<&'static str>,
    pub rows: Vec<TraceRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub values: Vec<f64>,
}

impl SolveTrace {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, iteration: usize, values: Vec<f64>) {
        debug_assert_eq!(values.len(), self.columns.len());
        debug_assert!(self.rows.last().is_none_or(|r| r.iteration < iteration));
        self.rows.push(TraceRow { iteration, values });
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r.values[j]).collect())
    }
}
