//! Next-day-open rise/fall targets.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ohlc::{OhlcSeries, PriceField};

/// Which of day `t`'s prices tomorrow's open is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TaskKind {
    OpVsOp,
    OpVsHigh,
    OpVsLow,
    OpVsClose,
}

impl TaskKind {
    pub const ALL: [TaskKind; 4] = [
        TaskKind::OpVsOp,
        TaskKind::OpVsHigh,
        TaskKind::OpVsLow,
        TaskKind::OpVsClose,
    ];

    pub fn reference(self) -> PriceField {
        match self {
            TaskKind::OpVsOp => PriceField::Open,
            TaskKind::OpVsHigh => PriceField::High,
            TaskKind::OpVsLow => PriceField::Low,
            TaskKind::OpVsClose => PriceField::Close,
        }
    }

    /// Short id used in file names and CSV cells: `op`, `hi`, `lo`, `cl`.
    pub fn id(self) -> &'static str {
        match self {
            TaskKind::OpVsOp => "op",
            TaskKind::OpVsHigh => "hi",
            TaskKind::OpVsLow => "lo",
            TaskKind::OpVsClose => "cl",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            TaskKind::OpVsOp => "Open w.r.t. Open",
            TaskKind::OpVsHigh => "Open w.r.t. High",
            TaskKind::OpVsLow => "Open w.r.t. Low",
            TaskKind::OpVsClose => "Open w.r.t. Close",
        }
    }

    pub fn question(self) -> &'static str {
        match self {
            TaskKind::OpVsOp => "Tomorrow's open > today's open?",
            TaskKind::OpVsHigh => "Tomorrow's open > today's high?",
            TaskKind::OpVsLow => "Tomorrow's open > today's low?",
            TaskKind::OpVsClose => "Tomorrow's open > today's close?",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let field: PriceField = s
            .parse()
            .map_err(|_| Error::UnknownName(format!("task `{s}`")))?;
        Ok(match field {
            PriceField::Open => TaskKind::OpVsOp,
            PriceField::High => TaskKind::OpVsHigh,
            PriceField::Low => TaskKind::OpVsLow,
            PriceField::Close => TaskKind::OpVsClose,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelVector {
    pub task: TaskKind,
    /// `labels[k]` belongs to day `first_index + k`.
    pub labels: Vec<u8>,
}

impl LabelVector {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// `label(t) = 1` iff `open(t + 1) > reference(t)`, for every day from
/// `first_index` up to the second-to-last bar. Ties are 0.
pub fn make_labels(series: &OhlcSeries, task: TaskKind, first_index: usize) -> Result<LabelVector> {
    let bars = series.bars();
    if bars.len() < 2 {
        return Err(Error::SeriesTooShort {
            required: 2,
            available: bars.len(),
        });
    }
    if first_index + 1 >= bars.len() {
        return Err(Error::InvalidParameter(format!(
            "first_index {first_index} leaves no labelable day in a series of {} bars",
            bars.len()
        )));
    }
    let field = task.reference();
    let labels = bars[first_index..]
        .windows(2)
        .map(|w| u8::from(w[1].open > w[0].price(field)))
        .collect();
    Ok(LabelVector { task, labels })
}
