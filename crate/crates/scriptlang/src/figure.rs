use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl Curve {
    pub fn new(x: Vec<f64>, y: Vec<f64>, label: Option<String>) -> Option<Self> {
        (x.len() == y.len() && !y.is_empty()).then_some(Self { x, y, label })
    }

    /// Curve with the default abscissa `1..=len(y)`.
    pub fn from_y(y: Vec<f64>, label: Option<String>) -> Option<Self> {
        let x = (1..=y.len()).map(|i| i as f64).collect();
        Self::new(x, y, label)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureData {
    pub index: usize,
    pub curves: Vec<Curve>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xlabel: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ylabel: Option<String>,
}

impl FigureData {
    pub fn new(index: usize) -> Self {
        Self {
            index,
            curves: Vec::new(),
            title: None,
            xlabel: None,
            ylabel: None,
        }
    }

    /// Plain-text dump: one block per curve with its label, x row and y row.
    pub fn dump(&self) -> String {
        let mut out = format!("figure {}", self.index);
        if let Some(title) = &self.title {
            out.push_str(&format!(" '{title}'"));
        }
        out.push_str(&format!(" ({} curves)\n", self.curves.len()));
        for (i, c) in self.curves.iter().enumerate() {
            let label = c.label.as_deref().unwrap_or("");
            out.push_str(&format!("  curve {} {label}\n", i + 1));
            let row = |v: &[f64]| {
                v.iter()
                    .map(|x| crate::value::format_number(*x))
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            out.push_str(&format!("    x: {}\n", row(&c.x)));
            out.push_str(&format!("    y: {}\n", row(&c.y)));
        }
        out
    }
}

/// Figures drawn during one execution plus the currently selected one.
#[derive(Debug, Clone, Default)]
pub struct Figures {
    figures: Vec<FigureData>,
    current: Option<usize>,
}

impl Figures {
    pub fn len(&self) -> usize {
        self.figures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.figures.is_empty()
    }

    /// Opens a fresh figure with the next unused index.
    pub fn open_new(&mut self) -> usize {
        let index = self.figures.iter().map(|f| f.index).max().unwrap_or(0) + 1;
        self.figures.push(FigureData::new(index));
        self.current = Some(self.figures.len() - 1);
        index
    }

    /// Selects figure `index`, creating it when absent. Returns true if a
    /// new figure was created.
    pub fn select(&mut self, index: usize) -> bool {
        if let Some(pos) = self.figures.iter().position(|f| f.index == index) {
            self.current = Some(pos);
            false
        } else {
            self.figures.push(FigureData::new(index));
            self.current = Some(self.figures.len() - 1);
            true
        }
    }

    /// The selected figure, opening figure 1 (or the next index) if none is.
    pub fn current_mut(&mut self) -> &mut FigureData {
        if self.current.is_none() {
            self.open_new();
        }
        let idx = self.current.expect("just opened");
        &mut self.figures[idx]
    }

    pub fn has_current(&self) -> bool {
        self.current.is_some()
    }

    pub fn into_vec(self) -> Vec<FigureData> {
        self.figures
    }

    pub fn as_slice(&self) -> &[FigureData] {
        &self.figures
    }
}
