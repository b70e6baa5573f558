//! Categorical tables and their encodings.
//!
//! A [`RawTable`] holds category text exactly as read from CSV. [`encode`]
//! turns it into an [`EncodedDataset`]: every feature value becomes an index
//! in `[0, C_i)` and every label an index in `[0, K)`. Category and class
//! indices follow lexicographic order of their text, so encoding is
//! deterministic across runs and platforms.
//!
//! Four schemes are supported. `ordinal` keeps one multiway feature per
//! column. `onehot_full` emits one binary indicator per category, and the two
//! drop variants omit the lexicographically first or last category of every
//! column (an all-zero indicator group then stands for the dropped category).

use std::collections::BTreeSet;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which column holds the class label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClassColumn {
    Name(String),
    /// 0-based; negative values count from the end (`-1` is the last column).
    Index(i64),
}

impl Default for ClassColumn {
    fn default() -> Self {
        ClassColumn::Index(-1)
    }
}

impl FromStr for ClassColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim().parse::<i64>() {
            Ok(i) => ClassColumn::Index(i),
            Err(_) => ClassColumn::Name(s.trim().to_string()),
        })
    }
}

impl fmt::Display for ClassColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassColumn::Name(name) => write!(f, "'{name}'"),
            ClassColumn::Index(i) => write!(f, "#{i}"),
        }
    }
}

/// A table of category text with one designated class column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawTable {
    column_names: Vec<String>,
    rows: Vec<Vec<String>>,
    class_column: usize,
}

impl RawTable {
    pub fn new(
        column_names: Vec<String>,
        rows: Vec<Vec<String>>,
        class_column: &ClassColumn,
    ) -> Result<Self> {
        let width = column_names.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::RaggedRow {
                    row: i,
                    expected: width,
                    found: row.len(),
                });
            }
        }
        if rows.is_empty() {
            return Err(Error::EmptyTable);
        }
        let class_column = resolve_class_column(&column_names, class_column)?;
        if width < 2 {
            return Err(Error::InvalidConfig(
                "table has no feature columns besides the class".into(),
            ));
        }
        Ok(RawTable {
            column_names,
            rows,
            class_column,
        })
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn class_column(&self) -> usize {
        self.class_column
    }

    pub fn class_name(&self) -> &str {
        &self.column_names[self.class_column]
    }

    /// Table column indices of the feature columns, in table order.
    pub fn feature_columns(&self) -> Vec<usize> {
        (0..self.column_names.len())
            .filter(|&c| c != self.class_column)
            .collect()
    }

    pub fn feature_names(&self) -> Vec<&str> {
        self.feature_columns()
            .into_iter()
            .map(|c| self.column_names[c].as_str())
            .collect()
    }

    /// Removes feature columns holding a single distinct value. Such columns
    /// can never improve a tree, but encoding rejects them.
    pub fn drop_constant_features(&self) -> (RawTable, Vec<String>) {
        let constant: Vec<usize> = self
            .feature_columns()
            .into_iter()
            .filter(|&c| {
                let first = &self.rows[0][c];
                self.rows.iter().all(|r| &r[c] == first)
            })
            .collect();
        let dropped = constant
            .iter()
            .map(|&c| self.column_names[c].clone())
            .collect();
        let keep: Vec<usize> = (0..self.column_names.len())
            .filter(|c| !constant.contains(c))
            .collect();
        let class_column = keep
            .iter()
            .position(|&c| c == self.class_column)
            .expect("class column is never dropped");
        let table = RawTable {
            column_names: keep.iter().map(|&c| self.column_names[c].clone()).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| keep.iter().map(|&c| r[c].clone()).collect())
                .collect(),
            class_column,
        };
        (table, dropped)
    }
}

fn resolve_class_column(names: &[String], selector: &ClassColumn) -> Result<usize> {
    let width = names.len() as i64;
    match selector {
        ClassColumn::Name(name) => names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::MissingClassColumn(selector.to_string())),
        ClassColumn::Index(i) => {
            let idx = if *i < 0 { width + i } else { *i };
            if (0..width).contains(&idx) {
                Ok(idx as usize)
            } else {
                Err(Error::MissingClassColumn(selector.to_string()))
            }
        }
    }
}

/// Reads a comma-delimited file. Without a header, columns are named
/// `c0, c1, ...` and the class column must be given by index.
pub fn load_csv(path: impl AsRef<Path>, class_column: &ClassColumn, has_header: bool) -> Result<RawTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, class_column, has_header)
}

/// [`load_csv`] over any reader.
pub fn read_csv<R: Read>(reader: R, class_column: &ClassColumn, has_header: bool) -> Result<RawTable> {
    let (names, rows) = read_records(reader, has_header)?;
    RawTable::new(names, rows, class_column)
}

/// Parses records without interpreting any column, as used for prediction
/// where the class column may be absent. Returns column names and rows.
pub fn read_records<R: Read>(reader: R, has_header: bool) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();
    let mut names: Option<Vec<String>> = None;
    if has_header {
        match records.next() {
            Some(rec) => {
                let rec = rec.map_err(|e| csv_error(0, e))?;
                names = Some(rec.iter().map(str::to_string).collect());
            }
            None => return Err(Error::EmptyTable),
        }
    }
    let mut rows = Vec::new();
    for (i, rec) in records.enumerate() {
        let rec = rec.map_err(|e| csv_error(i, e))?;
        if rec.len() == 1 && rec.get(0) == Some("") {
            continue;
        }
        let row: Vec<String> = rec.iter().map(str::to_string).collect();
        let width = names.as_ref().map_or_else(|| rows.first().map_or(row.len(), Vec::len), Vec::len);
        if row.len() != width {
            return Err(Error::RaggedRow {
                row: i,
                expected: width,
                found: row.len(),
            });
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptyTable);
    }
    let names = names.unwrap_or_else(|| (0..rows[0].len()).map(|c| format!("c{c}")).collect());
    Ok((names, rows))
}

fn csv_error(row: usize, e: csv::Error) -> Error {
    Error::Csv {
        row,
        message: e.to_string(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    Ordinal,
    OnehotFull,
    OnehotDropFirst,
    OnehotDropLast,
}

impl Encoding {
    pub const ALL: [Encoding; 4] = [
        Encoding::Ordinal,
        Encoding::OnehotFull,
        Encoding::OnehotDropFirst,
        Encoding::OnehotDropLast,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Encoding::Ordinal => "ordinal",
            Encoding::OnehotFull => "onehot_full",
            Encoding::OnehotDropFirst => "onehot_drop_first",
            Encoding::OnehotDropLast => "onehot_drop_last",
        }
    }
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Encoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "ordinal" => Ok(Encoding::Ordinal),
            "onehot" | "onehot_full" => Ok(Encoding::OnehotFull),
            "onehot_drop_first" => Ok(Encoding::OnehotDropFirst),
            "onehot_drop_last" => Ok(Encoding::OnehotDropLast),
            _ => Err(Error::UnknownFormat(s.to_string())),
        }
    }
}

/// Raw feature column with its categories in index order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMap {
    pub name: String,
    pub categories: Vec<String>,
}

/// Where an encoded feature comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureSource {
    /// Category index of `column` used as is.
    Ordinal { column: usize },
    /// `1` iff `column` takes category `category`.
    Indicator { column: usize, category: usize },
}

impl FeatureSource {
    pub fn column(self) -> usize {
        match self {
            FeatureSource::Ordinal { column } | FeatureSource::Indicator { column, .. } => column,
        }
    }
}

/// Everything needed to translate between category text and encoded indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryMaps {
    /// Raw feature columns in table order.
    pub columns: Vec<ColumnMap>,
    /// One entry per encoded feature.
    pub features: Vec<FeatureSource>,
    pub class_column: String,
    /// Position of the class column in the source table.
    pub class_position: usize,
    /// Class labels in index order.
    pub classes: Vec<String>,
}

impl CategoryMaps {
    /// Maps for data that was never text: columns `x0, x1, ...`, categories
    /// `"0".."C-1"`, classes `"0".."K-1"`.
    pub fn synthetic(categories: &[usize], k: usize) -> Self {
        CategoryMaps {
            columns: categories
                .iter()
                .enumerate()
                .map(|(i, &c)| ColumnMap {
                    name: format!("x{i}"),
                    categories: (0..c).map(|j| j.to_string()).collect(),
                })
                .collect(),
            features: (0..categories.len())
                .map(|column| FeatureSource::Ordinal { column })
                .collect(),
            class_column: "y".into(),
            class_position: categories.len(),
            classes: (0..k).map(|j| j.to_string()).collect(),
        }
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn feature_categories(&self, feature: usize) -> usize {
        match self.features[feature] {
            FeatureSource::Ordinal { column } => self.columns[column].categories.len(),
            FeatureSource::Indicator { .. } => 2,
        }
    }

    pub fn feature_name(&self, feature: usize) -> String {
        match self.features[feature] {
            FeatureSource::Ordinal { column } => self.columns[column].name.clone(),
            FeatureSource::Indicator { column, category } => {
                let col = &self.columns[column];
                format!("{}={}", col.name, col.categories[category])
            }
        }
    }

    /// Text for the edge taken when `feature` has index `value`.
    pub fn category_label(&self, feature: usize, value: usize) -> String {
        match self.features[feature] {
            FeatureSource::Ordinal { column } => self.columns[column].categories[value].clone(),
            FeatureSource::Indicator { .. } => if value == 1 { "yes" } else { "no" }.to_string(),
        }
    }

    pub fn class_label(&self, class: usize) -> &str {
        &self.classes[class]
    }

    /// Encodes one row given the text of each raw feature column, in
    /// `columns` order.
    pub fn encode_row(&self, row: usize, values: &[&str]) -> Result<Vec<u32>> {
        if values.len() != self.columns.len() {
            return Err(Error::Mismatch(format!(
                "row {row} has {} feature values, expected {}",
                values.len(),
                self.columns.len()
            )));
        }
        let mut indices = Vec::with_capacity(values.len());
        for (col, &text) in self.columns.iter().zip(values) {
            let idx = col
                .categories
                .binary_search_by(|c| c.as_str().cmp(text))
                .map_err(|_| Error::UnknownCategory {
                    row,
                    column: col.name.clone(),
                    value: text.to_string(),
                })?;
            indices.push(idx);
        }
        Ok(self
            .features
            .iter()
            .map(|f| match *f {
                FeatureSource::Ordinal { column } => indices[column] as u32,
                FeatureSource::Indicator { column, category } => (indices[column] == category) as u32,
            })
            .collect())
    }

    /// Recovers raw category text from an encoded row. An all-zero indicator
    /// group decodes to the category its scheme dropped.
    pub fn decode_row(&self, encoded: &[u32]) -> Vec<String> {
        let mut chosen: Vec<Option<usize>> = vec![None; self.columns.len()];
        let mut present: Vec<Vec<bool>> = self
            .columns
            .iter()
            .map(|c| vec![false; c.categories.len()])
            .collect();
        for (f, &v) in self.features.iter().zip(encoded) {
            match *f {
                FeatureSource::Ordinal { column } => chosen[column] = Some(v as usize),
                FeatureSource::Indicator { column, category } => {
                    present[column][category] = true;
                    if v == 1 {
                        chosen[column] = Some(category);
                    }
                }
            }
        }
        chosen
            .iter()
            .zip(&self.columns)
            .zip(&present)
            .map(|((c, col), present)| {
                let idx = c.unwrap_or_else(|| present.iter().position(|p| !p).unwrap_or(0));
                col.categories[idx].clone()
            })
            .collect()
    }
}

/// An immutable, fully encoded categorical dataset.
///
/// Feature values are stored column-major: splits scan one feature over the
/// rows of a branch.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedDataset {
    categories: Vec<usize>,
    columns: Vec<Vec<u32>>,
    labels: Vec<u32>,
    k: usize,
    maps: CategoryMaps,
    encoding: Encoding,
}

impl EncodedDataset {
    /// Builds a dataset from row-major indices with synthetic category maps.
    pub fn from_rows(categories: Vec<usize>, rows: &[Vec<u32>], labels: Vec<u32>) -> Result<Self> {
        let k = labels.iter().map(|&y| y as usize + 1).max().unwrap_or(0);
        let maps = CategoryMaps::synthetic(&categories, k);
        Self::assemble(categories, rows, labels, k, maps, Encoding::Ordinal)
    }

    fn assemble(
        categories: Vec<usize>,
        rows: &[Vec<u32>],
        labels: Vec<u32>,
        k: usize,
        maps: CategoryMaps,
        encoding: Encoding,
    ) -> Result<Self> {
        let q = categories.len();
        if rows.is_empty() {
            return Err(Error::EmptyTable);
        }
        if rows.len() != labels.len() {
            return Err(Error::Mismatch(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        if let Some(i) = categories.iter().position(|&c| c < 2) {
            return Err(Error::InvalidConfig(format!(
                "feature {i} has fewer than 2 categories"
            )));
        }
        if maps.n_features() != q {
            return Err(Error::Mismatch("category maps do not cover every feature".into()));
        }
        let mut columns = vec![Vec::with_capacity(rows.len()); q];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != q {
                return Err(Error::RaggedRow {
                    row: r,
                    expected: q,
                    found: row.len(),
                });
            }
            for (f, &v) in row.iter().enumerate() {
                if v as usize >= categories[f] {
                    return Err(Error::FeatureRange {
                        feature: f,
                        value: v,
                        categories: categories[f],
                    });
                }
                columns[f].push(v);
            }
        }
        let mut seen = vec![false; k];
        for &y in &labels {
            match seen.get_mut(y as usize) {
                Some(s) => *s = true,
                None => return Err(Error::Mismatch(format!("label {y} out of range for {k} classes"))),
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::Mismatch(format!("class index {missing} never occurs")));
        }
        Ok(EncodedDataset {
            categories,
            columns,
            labels,
            k,
            maps,
            encoding,
        })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn q(&self) -> usize {
        self.categories.len()
    }

    /// Number of classes.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn categories(&self) -> &[usize] {
        &self.categories
    }

    pub fn column(&self, feature: usize) -> &[u32] {
        &self.columns[feature]
    }

    pub fn value(&self, row: usize, feature: usize) -> u32 {
        self.columns[feature][row]
    }

    pub fn row(&self, row: usize) -> Vec<u32> {
        self.columns.iter().map(|c| c[row]).collect()
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn maps(&self) -> &CategoryMaps {
        &self.maps
    }

    pub fn encoding(&self) -> Encoding {
        self.encoding
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_doc())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: DatasetDoc = serde_json::from_str(text)?;
        if doc.n != doc.labels.len() || doc.q != doc.categories.len() {
            return Err(Error::Mismatch("declared n/q disagree with the data".into()));
        }
        let ds = Self::assemble(doc.categories, &doc.features, doc.labels, doc.k, doc.category_maps, doc.encoding_scheme)?;
        if (0..ds.q()).any(|f| ds.maps.feature_categories(f) != ds.categories[f]) {
            return Err(Error::Mismatch("category maps disagree with category counts".into()));
        }
        Ok(ds)
    }

    fn to_doc(&self) -> DatasetDoc {
        DatasetDoc {
            n: self.n(),
            q: self.q(),
            k: self.k,
            categories: self.categories.clone(),
            category_maps: self.maps.clone(),
            features: (0..self.n()).map(|r| self.row(r)).collect(),
            labels: self.labels.clone(),
            encoding_scheme: self.encoding,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct DatasetDoc {
    n: usize,
    q: usize,
    #[serde(rename = "K")]
    k: usize,
    categories: Vec<usize>,
    category_maps: CategoryMaps,
    features: Vec<Vec<u32>>,
    labels: Vec<u32>,
    encoding_scheme: Encoding,
}

/// Encodes a raw table under `scheme`.
///
/// Every feature column must hold at least two distinct values. A table
/// with a single class is accepted (`K = 1`).
pub fn encode(raw: &RawTable, scheme: Encoding) -> Result<EncodedDataset> {
    let feature_cols = raw.feature_columns();
    let mut columns = Vec::with_capacity(feature_cols.len());
    for &c in &feature_cols {
        let distinct: BTreeSet<&str> = raw.rows.iter().map(|r| r[c].as_str()).collect();
        if distinct.len() < 2 {
            return Err(Error::ConstantFeature {
                column: raw.column_names[c].clone(),
                category: raw.rows[0][c].clone(),
            });
        }
        columns.push(ColumnMap {
            name: raw.column_names[c].clone(),
            categories: distinct.into_iter().map(str::to_string).collect(),
        });
    }

    let mut features = Vec::new();
    for (column, col) in columns.iter().enumerate() {
        let cats = col.categories.len();
        match scheme {
            Encoding::Ordinal => features.push(FeatureSource::Ordinal { column }),
            Encoding::OnehotFull => {
                features.extend((0..cats).map(|category| FeatureSource::Indicator { column, category }))
            }
            Encoding::OnehotDropFirst => {
                features.extend((1..cats).map(|category| FeatureSource::Indicator { column, category }))
            }
            Encoding::OnehotDropLast => {
                features.extend((0..cats - 1).map(|category| FeatureSource::Indicator { column, category }))
            }
        }
    }

    let classes: Vec<String> = raw
        .rows
        .iter()
        .map(|r| r[raw.class_column].as_str())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(str::to_string)
        .collect();
    let maps = CategoryMaps {
        columns,
        features,
        class_column: raw.class_name().to_string(),
        class_position: raw.class_column,
        classes,
    };

    let mut rows = Vec::with_capacity(raw.n_rows());
    let mut labels = Vec::with_capacity(raw.n_rows());
    for (i, r) in raw.rows.iter().enumerate() {
        let values: Vec<&str> = feature_cols.iter().map(|&c| r[c].as_str()).collect();
        rows.push(maps.encode_row(i, &values)?);
        let label = &r[raw.class_column];
        labels.push(maps.classes.binary_search(label).expect("label collected above") as u32);
    }
    let categories = (0..maps.n_features()).map(|f| maps.feature_categories(f)).collect();
    let k = maps.classes.len();
    EncodedDataset::assemble(categories, &rows, labels, k, maps, scheme)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(text: &str) -> RawTable {
        read_csv(text.as_bytes(), &ClassColumn::Index(-1), true).unwrap()
    }

    fn four_categories() -> RawTable {
        table("x,y\nd,1\nb,0\na,1\nc,0\n")
    }

    #[test]
    fn header_and_last_class_column() {
        let t = table("a,b,c\nx,1,p\ny,2,q\nx,2,p\ny,1,q\n");
        assert_eq!(t.n_rows(), 4);
        assert_eq!(t.feature_names(), vec!["a", "b"]);
        assert_eq!(t.class_name(), "c");
    }

    #[test]
    fn class_column_by_name_or_index() {
        let text = "k,a,b\n1,x,y\n0,y,x\n";
        let by_name = read_csv(text.as_bytes(), &"k".parse().unwrap(), true).unwrap();
        let by_index = read_csv(text.as_bytes(), &ClassColumn::Index(0), true).unwrap();
        let by_neg = read_csv(text.as_bytes(), &ClassColumn::Index(-3), true).unwrap();
        assert_eq!(by_name, by_index);
        assert_eq!(by_name, by_neg);
        assert!(matches!(
            read_csv(text.as_bytes(), &"missing".parse().unwrap(), true),
            Err(Error::MissingClassColumn(_))
        ));
        assert!(matches!(
            read_csv(text.as_bytes(), &ClassColumn::Index(3), true),
            Err(Error::MissingClassColumn(_))
        ));
    }

    #[test]
    fn ragged_row_names_row() {
        let err = read_csv("a,b,c\n1,2,3\n1,2\n".as_bytes(), &ClassColumn::default(), true).unwrap_err();
        assert!(matches!(err, Error::RaggedRow { row: 1, expected: 3, found: 2 }), "{err}");
    }

    #[test]
    fn empty_table_rejected() {
        assert!(matches!(
            read_csv("a,b\n".as_bytes(), &ClassColumn::default(), true),
            Err(Error::EmptyTable)
        ));
        assert!(matches!(
            read_csv("".as_bytes(), &ClassColumn::default(), false),
            Err(Error::EmptyTable)
        ));
    }

    #[test]
    fn headerless_columns_get_positional_names() {
        let t = read_csv("a,1\nb,0\n".as_bytes(), &ClassColumn::Index(1), false).unwrap();
        assert_eq!(t.column_names(), &["c0".to_string(), "c1".to_string()]);
    }

    #[test]
    fn ordinal_counts_categories() {
        let ds = encode(&four_categories(), Encoding::Ordinal).unwrap();
        assert_eq!(ds.q(), 1);
        assert_eq!(ds.categories(), &[4]);
        // lexicographic: a=0 b=1 c=2 d=3
        assert_eq!(ds.column(0), &[3, 1, 0, 2]);
        assert_eq!(ds.labels(), &[1, 0, 1, 0]);
    }

    #[test]
    fn onehot_variants_column_counts() {
        let raw = four_categories();
        let full = encode(&raw, Encoding::OnehotFull).unwrap();
        assert_eq!(full.q(), 4);
        assert!(full.categories().iter().all(|&c| c == 2));
        assert_eq!(encode(&raw, Encoding::OnehotDropFirst).unwrap().q(), 3);
        assert_eq!(encode(&raw, Encoding::OnehotDropLast).unwrap().q(), 3);
        // first row is "d": indicator 3 fires under the full scheme
        assert_eq!(full.row(0), vec![0, 0, 0, 1]);
        // drop-last drops "d", so its row is all zeros
        assert_eq!(encode(&raw, Encoding::OnehotDropLast).unwrap().row(0), vec![0, 0, 0]);
    }

    #[test]
    fn constant_column_rejected_with_name() {
        let raw = table("a,b,y\nx,1,0\nx,2,1\n");
        for scheme in Encoding::ALL {
            match encode(&raw, scheme) {
                Err(Error::ConstantFeature { column, .. }) => assert_eq!(column, "a"),
                other => panic!("{scheme}: {other:?}"),
            }
        }
        let (dropped, names) = raw.drop_constant_features();
        assert_eq!(names, vec!["a".to_string()]);
        assert_eq!(encode(&dropped, Encoding::Ordinal).unwrap().q(), 1);
    }

    #[test]
    fn single_class_accepted() {
        let ds = encode(&table("a,y\n1,p\n2,p\n"), Encoding::Ordinal).unwrap();
        assert_eq!(ds.k(), 1);
    }

    #[test]
    fn question_mark_is_a_category() {
        let ds = encode(&table("a,y\n?,p\n2,q\n"), Encoding::Ordinal).unwrap();
        assert_eq!(ds.maps().columns[0].categories, vec!["2".to_string(), "?".to_string()]);
    }

    #[test]
    fn decode_round_trip_all_schemes() {
        let raw = table("a,b,y\nz,1,p\ny,2,q\nx,3,p\ny,1,r\nz,3,q\n");
        for scheme in Encoding::ALL {
            let ds = encode(&raw, scheme).unwrap();
            for r in 0..ds.n() {
                let decoded = ds.maps().decode_row(&ds.row(r));
                assert_eq!(decoded, vec![raw.rows()[r][0].clone(), raw.rows()[r][1].clone()], "{scheme}");
            }
        }
    }

    #[test]
    fn json_round_trip_and_determinism() {
        let raw = table("a,b,y\nz,1,p\ny,2,q\nx,3,p\n");
        for scheme in Encoding::ALL {
            let ds = encode(&raw, scheme).unwrap();
            let json = ds.to_json().unwrap();
            assert_eq!(json, encode(&raw, scheme).unwrap().to_json().unwrap());
            assert_eq!(EncodedDataset::from_json(&json).unwrap(), ds);
        }
        let json = encode(&raw, Encoding::Ordinal).unwrap().to_json().unwrap();
        for field in ["\"n\"", "\"q\"", "\"K\"", "\"categories\"", "\"category_maps\"", "\"features\"", "\"labels\"", "\"encoding_scheme\""] {
            assert!(json.contains(field), "{field} missing");
        }
    }

    #[test]
    fn encode_row_unknown_category() {
        let ds = encode(&four_categories(), Encoding::Ordinal).unwrap();
        assert!(matches!(
            ds.maps().encode_row(7, &["e"]),
            Err(Error::UnknownCategory { row: 7, .. })
        ));
    }

    #[test]
    fn from_rows_validates() {
        assert!(EncodedDataset::from_rows(vec![2], &[vec![2]], vec![0]).is_err());
        assert!(EncodedDataset::from_rows(vec![1], &[vec![0]], vec![0]).is_err());
        // class 1 never occurs although class 2 does
        assert!(EncodedDataset::from_rows(vec![2], &[vec![0], vec![1]], vec![0, 2]).is_err());
        assert!(EncodedDataset::from_rows(vec![2], &[vec![0], vec![1]], vec![0, 1]).is_ok());
    }
}
