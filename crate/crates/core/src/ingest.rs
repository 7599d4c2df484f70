//! Corpus ingestion: companies, valuation rounds, search-interest window
//! exports and quality metadata.
//!
//! Every reader has a matching writer producing the same format, so a parsed
//! corpus can be written back and re-read unchanged.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calendar::{format_date, parse_date};

/// Valuation (millions of USD) at or above which a venture counts as a unicorn.
pub const UNICORN_VALUATION_MUSD: f64 = 1000.0;

/// Maximum number of weekly points a single export window may hold.
pub const MAX_WINDOW_POINTS: usize = 200;

pub const COMPANIES_HEADER: [&str; 8] = [
    "id",
    "name",
    "founded",
    "is_b2c",
    "is_platform",
    "sector",
    "industry",
    "sub_industry",
];
pub const VALUATIONS_HEADER: [&str; 3] = ["company_id", "date", "valuation_musd"];
pub const METADATA_HEADER: [&str; 4] =
    ["company_id", "brand_unique", "category_group", "related_query_count"];
pub const WINDOW_HEADER: [&str; 2] = ["week", "value"];

pub const COMPANIES_FILE: &str = "companies.csv";
pub const VALUATIONS_FILE: &str = "valuations.csv";
pub const METADATA_FILE: &str = "gt_metadata.csv";
pub const WINDOWS_DIR: &str = "gt";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: header mismatch: expected `{expected}`, found `{found}`")]
    Header {
        path: String,
        expected: String,
        found: String,
    },
    #[error("{path}, row {row}: {kind}")]
    Row {
        path: String,
        row: usize,
        kind: RowError,
    },
    #[error("{0}: file name does not follow `<company_id>.w<index>.csv`")]
    WindowFileName(String),
    #[error("{path}: window exceeds {MAX_WINDOW_POINTS} points ({count})")]
    WindowTooLong { path: String, count: usize },
    #[error("{0}: window holds no points")]
    EmptyWindow(String),
    #[error("company {company}: window index {index} appears twice")]
    DuplicateWindow { company: String, index: u32 },
    #[error("valuation rounds are empty")]
    EmptyRounds,
    #[error("invalid founding date `{0}` (expected YYYY or YYYY-MM-DD)")]
    FoundingDate(String),
}

/// Per-row failure reasons, reported together with the data row number
/// (1-based, header excluded).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RowError {
    FieldCount { expected: usize, found: usize },
    MalformedDate(String),
    UnknownBoolean(String),
    DuplicateId(String),
    FoundedAfterEnd { founded: NaiveDate, end: NaiveDate },
    MalformedNumber(String),
    NonPositiveValuation(String),
    DuplicateRound { company: String, date: NaiveDate },
    UnknownCategoryGroup(String),
    ValueOutOfRange(String),
    NonWeeklySpacing { previous: NaiveDate, current: NaiveDate },
}

impl fmt::Display for RowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowError::FieldCount { expected, found } => {
                write!(f, "expected {expected} fields, found {found}")
            }
            RowError::MalformedDate(s) => write!(f, "malformed date `{s}`"),
            RowError::UnknownBoolean(s) => write!(f, "unknown boolean token `{s}`"),
            RowError::DuplicateId(s) => write!(f, "duplicate id `{s}`"),
            RowError::FoundedAfterEnd { founded, end } => {
                write!(f, "founded after analysis end ({founded} > {end})")
            }
            RowError::MalformedNumber(s) => write!(f, "malformed number `{s}`"),
            RowError::NonPositiveValuation(s) => write!(f, "nonpositive valuation `{s}`"),
            RowError::DuplicateRound { company, date } => {
                write!(f, "duplicate round for {company} on {date}")
            }
            RowError::UnknownCategoryGroup(s) => write!(f, "unknown category group `{s}`"),
            RowError::ValueOutOfRange(s) => write!(f, "value `{s}` outside 0..=100"),
            RowError::NonWeeklySpacing { previous, current } => {
                write!(f, "non-weekly spacing between {previous} and {current}")
            }
        }
    }
}

pub type Result<T> = std::result::Result<T, IngestError>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompanyRecord {
    pub id: String,
    pub name: String,
    pub founded: NaiveDate,
    pub is_b2c: bool,
    pub is_platform: bool,
    pub sector: String,
    pub industry: String,
    pub sub_industry: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValuationRound {
    pub company_id: String,
    pub date: NaiveDate,
    /// Millions of US dollars.
    pub valuation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValuationSeries {
    pub company_id: String,
    /// Sorted by strictly increasing date.
    pub rounds: Vec<ValuationRound>,
    pub is_unicorn: bool,
}

impl ValuationSeries {
    /// Builds a series from unsorted rounds, deriving the unicorn flag.
    pub fn from_rounds(company_id: impl Into<String>, mut rounds: Vec<ValuationRound>) -> Result<Self> {
        rounds.sort_by_key(|r| r.date);
        let is_unicorn = derive_unicorn(&rounds)?;
        Ok(ValuationSeries {
            company_id: company_id.into(),
            rounds,
            is_unicorn,
        })
    }

    pub fn max_valuation(&self) -> Option<f64> {
        self.rounds.iter().map(|r| r.valuation).fold(None, |acc, v| match acc {
            Some(m) if m >= v => Some(m),
            _ => Some(v),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GtPoint {
    pub week: NaiveDate,
    pub value: f64,
}

/// One exported search-interest window (at most 200 weekly points, normalized
/// by the export service to its own maximum).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GtWindow {
    pub company_id: String,
    pub index: u32,
    pub points: Vec<GtPoint>,
    /// Set when no point reaches 100, i.e. the window is not a complete
    /// service export.
    pub fragment: bool,
}

impl GtWindow {
    pub fn new(company_id: impl Into<String>, index: u32, points: Vec<GtPoint>) -> Self {
        let fragment = !points.iter().any(|p| p.value == 100.0);
        GtWindow {
            company_id: company_id.into(),
            index,
            points,
            fragment,
        }
    }

    pub fn first_week(&self) -> Option<NaiveDate> {
        self.points.first().map(|p| p.week)
    }

    pub fn file_name(&self) -> String {
        format!("{}.w{}.csv", self.company_id, self.index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CategoryGroup {
    A,
    B,
}

impl fmt::Display for CategoryGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CategoryGroup::A => "A",
            CategoryGroup::B => "B",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GtMetadata {
    pub company_id: String,
    pub brand_unique: bool,
    pub category_group: CategoryGroup,
    pub related_query_count: u32,
}

/// A fully parsed input corpus.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    pub companies: Vec<CompanyRecord>,
    pub valuations: BTreeMap<String, ValuationSeries>,
    /// Several rows per company are allowed: alternative brand-term variants.
    pub metadata: BTreeMap<String, Vec<GtMetadata>>,
    /// Windows per company, sorted by index.
    pub windows: BTreeMap<String, Vec<GtWindow>>,
}

/// `YYYY` maps to January 1 of that year; `YYYY-MM-DD` passes through.
pub fn resolve_founding_date(raw: &str) -> Result<NaiveDate> {
    let t = raw.trim();
    if t.len() == 4 && t.bytes().all(|b| b.is_ascii_digit()) {
        let year: i32 = t.parse().map_err(|_| IngestError::FoundingDate(raw.to_string()))?;
        return NaiveDate::from_ymd_opt(year, 1, 1).ok_or_else(|| IngestError::FoundingDate(raw.to_string()));
    }
    parse_date(t).ok_or_else(|| IngestError::FoundingDate(raw.to_string()))
}

/// True iff any round reaches a valuation of at least 1000 (millions).
pub fn derive_unicorn(rounds: &[ValuationRound]) -> Result<bool> {
    if rounds.is_empty() {
        return Err(IngestError::EmptyRounds);
    }
    Ok(rounds.iter().any(|r| r.valuation >= UNICORN_VALUATION_MUSD))
}

fn parse_bool(raw: &str) -> std::result::Result<bool, RowError> {
    match raw.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(RowError::UnknownBoolean(other.to_string())),
    }
}

fn check_header(path: &str, found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    let found_fields: Vec<&str> = found.iter().map(str::trim).collect();
    if found_fields != expected {
        return Err(IngestError::Header {
            path: path.to_string(),
            expected: expected.join(","),
            found: found_fields.join(","),
        });
    }
    Ok(())
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader)
}

/// Iterates data rows as `(row_number, record)`, checking the header first.
fn rows<R: Read>(
    origin: &str,
    reader: R,
    expected: &[&str],
) -> Result<Vec<(usize, csv::StringRecord)>> {
    let mut rdr = csv_reader(reader);
    let header = rdr.headers().map_err(|e| IngestError::Csv {
        path: origin.to_string(),
        source: e,
    })?;
    check_header(origin, header, expected)?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| IngestError::Csv {
            path: origin.to_string(),
            source: e,
        })?;
        let row = i + 1;
        if rec.len() != expected.len() {
            return Err(row_err(origin, row, RowError::FieldCount {
                expected: expected.len(),
                found: rec.len(),
            }));
        }
        out.push((row, rec));
    }
    Ok(out)
}

fn row_err(origin: &str, row: usize, kind: RowError) -> IngestError {
    IngestError::Row {
        path: origin.to_string(),
        row,
        kind,
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| IngestError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| IngestError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Reads `companies.csv` content. `analysis_end` bounds founding dates.
pub fn read_companies<R: Read>(origin: &str, reader: R, analysis_end: NaiveDate) -> Result<Vec<CompanyRecord>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (row, rec) in rows(origin, reader, &COMPANIES_HEADER)? {
        let err = |kind| row_err(origin, row, kind);
        let id = rec[0].trim().to_string();
        let founded = resolve_founding_date(&rec[2]).map_err(|_| err(RowError::MalformedDate(rec[2].to_string())))?;
        if founded > analysis_end {
            return Err(err(RowError::FoundedAfterEnd {
                founded,
                end: analysis_end,
            }));
        }
        let is_b2c = parse_bool(&rec[3]).map_err(err)?;
        let is_platform = parse_bool(&rec[4]).map_err(err)?;
        if !seen.insert(id.clone()) {
            return Err(err(RowError::DuplicateId(id)));
        }
        out.push(CompanyRecord {
            id,
            name: rec[1].trim().to_string(),
            founded,
            is_b2c,
            is_platform,
            sector: rec[5].trim().to_string(),
            industry: rec[6].trim().to_string(),
            sub_industry: rec[7].trim().to_string(),
        });
    }
    Ok(out)
}

pub fn parse_companies(path: &Path, analysis_end: NaiveDate) -> Result<Vec<CompanyRecord>> {
    read_companies(&path.display().to_string(), open(path)?, analysis_end)
}

pub fn write_companies<W: Write>(writer: W, companies: &[CompanyRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(COMPANIES_HEADER)?;
    for c in companies {
        w.write_record([
            c.id.as_str(),
            c.name.as_str(),
            &format_date(c.founded),
            if c.is_b2c { "true" } else { "false" },
            if c.is_platform { "true" } else { "false" },
            c.sector.as_str(),
            c.industry.as_str(),
            c.sub_industry.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `valuations.csv` content, grouping rounds by company.
pub fn read_valuations<R: Read>(origin: &str, reader: R) -> Result<BTreeMap<String, ValuationSeries>> {
    let mut grouped: BTreeMap<String, Vec<ValuationRound>> = BTreeMap::new();
    let mut seen = BTreeSet::new();
    for (row, rec) in rows(origin, reader, &VALUATIONS_HEADER)? {
        let err = |kind| row_err(origin, row, kind);
        let company_id = rec[0].trim().to_string();
        let date = parse_date(&rec[1]).ok_or_else(|| err(RowError::MalformedDate(rec[1].to_string())))?;
        let raw_val = rec[2].trim();
        let valuation: f64 = raw_val
            .parse()
            .map_err(|_| err(RowError::MalformedNumber(raw_val.to_string())))?;
        if !valuation.is_finite() {
            return Err(err(RowError::MalformedNumber(raw_val.to_string())));
        }
        if valuation <= 0.0 {
            return Err(err(RowError::NonPositiveValuation(raw_val.to_string())));
        }
        if !seen.insert((company_id.clone(), date)) {
            return Err(err(RowError::DuplicateRound {
                company: company_id,
                date,
            }));
        }
        grouped.entry(company_id.clone()).or_default().push(ValuationRound {
            company_id,
            date,
            valuation,
        });
    }
    grouped
        .into_iter()
        .map(|(id, rounds)| ValuationSeries::from_rounds(id.clone(), rounds).map(|s| (id, s)))
        .collect()
}

pub fn parse_valuations(path: &Path) -> Result<BTreeMap<String, ValuationSeries>> {
    read_valuations(&path.display().to_string(), open(path)?)
}

pub fn write_valuations<'a, W, I>(writer: W, series: I) -> csv::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a ValuationSeries>,
{
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(VALUATIONS_HEADER)?;
    for s in series {
        for r in &s.rounds {
            w.write_record([r.company_id.as_str(), &format_date(r.date), &r.valuation.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads quality metadata. Repeated company ids are kept as brand variants.
pub fn read_metadata<R: Read>(origin: &str, reader: R) -> Result<BTreeMap<String, Vec<GtMetadata>>> {
    let mut out: BTreeMap<String, Vec<GtMetadata>> = BTreeMap::new();
    for (row, rec) in rows(origin, reader, &METADATA_HEADER)? {
        let err = |kind| row_err(origin, row, kind);
        let company_id = rec[0].trim().to_string();
        let brand_unique = parse_bool(&rec[1]).map_err(err)?;
        let category_group = match rec[2].trim() {
            "A" => CategoryGroup::A,
            "B" => CategoryGroup::B,
            other => return Err(err(RowError::UnknownCategoryGroup(other.to_string()))),
        };
        let raw = rec[3].trim();
        let related_query_count: u32 = raw.parse().map_err(|_| err(RowError::MalformedNumber(raw.to_string())))?;
        out.entry(company_id.clone()).or_default().push(GtMetadata {
            company_id,
            brand_unique,
            category_group,
            related_query_count,
        });
    }
    Ok(out)
}

pub fn parse_metadata(path: &Path) -> Result<BTreeMap<String, Vec<GtMetadata>>> {
    read_metadata(&path.display().to_string(), open(path)?)
}

pub fn write_metadata<'a, W, I>(writer: W, metadata: I) -> csv::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a GtMetadata>,
{
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(METADATA_HEADER)?;
    for m in metadata {
        w.write_record([
            m.company_id.as_str(),
            if m.brand_unique { "true" } else { "false" },
            &m.category_group.to_string(),
            &m.related_query_count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Splits `<company_id>.w<index>.csv` into its parts.
pub fn parse_window_file_name(name: &str) -> Option<(String, u32)> {
    let stem = name.strip_suffix(".csv")?;
    let (company, index) = stem.rsplit_once(".w")?;
    if company.is_empty() || index.is_empty() || !index.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some((company.to_string(), index.parse().ok()?))
}

fn parse_gt_value(raw: &str) -> std::result::Result<f64, RowError> {
    let t = raw.trim();
    if t == "<1" {
        return Ok(0.0);
    }
    match t.parse::<i64>() {
        Ok(v) if (0..=100).contains(&v) => Ok(v as f64),
        _ => Err(RowError::ValueOutOfRange(t.to_string())),
    }
}

/// Reads one two-column weekly export.
pub fn read_gt_export<R: Read>(origin: &str, company_id: &str, index: u32, reader: R) -> Result<GtWindow> {
    let mut points: Vec<GtPoint> = Vec::new();
    for (row, rec) in rows(origin, reader, &WINDOW_HEADER)? {
        let err = |kind| row_err(origin, row, kind);
        let week = parse_date(&rec[0]).ok_or_else(|| err(RowError::MalformedDate(rec[0].to_string())))?;
        let value = parse_gt_value(&rec[1]).map_err(err)?;
        if let Some(prev) = points.last() {
            if (week - prev.week).num_days() != 7 {
                return Err(err(RowError::NonWeeklySpacing {
                    previous: prev.week,
                    current: week,
                }));
            }
        }
        points.push(GtPoint { week, value });
    }
    if points.len() > MAX_WINDOW_POINTS {
        return Err(IngestError::WindowTooLong {
            path: origin.to_string(),
            count: points.len(),
        });
    }
    if points.is_empty() {
        return Err(IngestError::EmptyWindow(origin.to_string()));
    }
    Ok(GtWindow::new(company_id, index, points))
}

/// Reads a window file; company id and window index come from the file name.
pub fn parse_gt_export(path: &Path) -> Result<GtWindow> {
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| IngestError::WindowFileName(path.display().to_string()))?;
    let (company, index) =
        parse_window_file_name(name).ok_or_else(|| IngestError::WindowFileName(path.display().to_string()))?;
    read_gt_export(&path.display().to_string(), &company, index, open(path)?)
}

pub fn write_gt_export<W: Write>(writer: W, window: &GtWindow) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(WINDOW_HEADER)?;
    for p in &window.points {
        let value = if p.value > 0.0 && p.value < 1.0 {
            "<1".to_string()
        } else {
            format!("{}", p.value.round() as i64)
        };
        w.write_record([format_date(p.week), value])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads every `*.csv` window export in `dir`, grouped by company and sorted
/// by window index.
pub fn parse_gt_dir(dir: &Path) -> Result<BTreeMap<String, Vec<GtWindow>>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| IngestError::Io {
            path: dir.to_path_buf(),
            source: e,
        })?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "csv"))
        .collect();
    files.sort();
    let mut out: BTreeMap<String, Vec<GtWindow>> = BTreeMap::new();
    for f in files {
        let w = parse_gt_export(&f)?;
        out.entry(w.company_id.clone()).or_default().push(w);
    }
    for (company, windows) in out.iter_mut() {
        windows.sort_by_key(|w| w.index);
        for pair in windows.windows(2) {
            if pair[0].index == pair[1].index {
                return Err(IngestError::DuplicateWindow {
                    company: company.clone(),
                    index: pair[0].index,
                });
            }
        }
    }
    Ok(out)
}

/// Loads a corpus directory laid out as `companies.csv`, `valuations.csv`,
/// `gt_metadata.csv` and `gt/<company_id>.w<index>.csv`.
pub fn load_corpus(dir: &Path, analysis_end: NaiveDate) -> Result<Corpus> {
    let companies = parse_companies(&dir.join(COMPANIES_FILE), analysis_end)?;
    let valuations = parse_valuations(&dir.join(VALUATIONS_FILE))?;
    let metadata = parse_metadata(&dir.join(METADATA_FILE))?;
    let windows = parse_gt_dir(&dir.join(WINDOWS_DIR))?;
    Ok(Corpus {
        companies,
        valuations,
        metadata,
        windows,
    })
}

/// Writes a corpus in the layout [`load_corpus`] reads.
pub fn write_corpus(dir: &Path, corpus: &Corpus) -> Result<()> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |e: csv::Error| IngestError::Csv {
            path: path.display().to_string(),
            source: e,
        }
    };
    let gt_dir = dir.join(WINDOWS_DIR);
    std::fs::create_dir_all(&gt_dir).map_err(|e| IngestError::Io {
        path: gt_dir.clone(),
        source: e,
    })?;
    let p = dir.join(COMPANIES_FILE);
    write_companies(create(&p)?, &corpus.companies).map_err(io(&p))?;
    let p = dir.join(VALUATIONS_FILE);
    write_valuations(create(&p)?, corpus.valuations.values()).map_err(io(&p))?;
    let p = dir.join(METADATA_FILE);
    write_metadata(create(&p)?, corpus.metadata.values().flatten()).map_err(io(&p))?;
    for w in corpus.windows.values().flatten() {
        let p = gt_dir.join(w.file_name());
        write_gt_export(create(&p)?, w).map_err(io(&p))?;
    }
    Ok(())
}

/// Companies whose founding date falls after at least one of their
/// valuation rounds.
pub fn founding_date_warnings(
    companies: &[CompanyRecord],
    valuations: &BTreeMap<String, ValuationSeries>,
) -> Vec<String> {
    companies
        .iter()
        .filter(|c| {
            valuations
                .get(&c.id)
                .is_some_and(|s| s.rounds.iter().any(|r| r.date < c.founded))
        })
        .map(|c| c.id.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    const HEADER: &str = "id,name,founded,is_b2c,is_platform,sector,industry,sub_industry\n";

    #[test]
    fn company_row_maps_fields() {
        let data = format!("{HEADER}c1,Airbnb,2008-08-01,true,true,Internet,eCommerce,Marketplace\n");
        let cs = read_companies("companies.csv", data.as_bytes(), d(2019, 8, 31)).unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].founded, d(2008, 8, 1));
        assert!(cs[0].is_b2c && cs[0].is_platform);
        assert_eq!(cs[0].sub_industry, "Marketplace");
    }

    #[test]
    fn founded_after_analysis_end_is_rejected() {
        let data = format!("{HEADER}c1,X,2025-01-01,true,false,a,b,c\n");
        let err = read_companies("companies.csv", data.as_bytes(), d(2019, 8, 31)).unwrap_err();
        assert!(err.to_string().contains("founded after analysis end"), "{err}");
    }

    #[test]
    fn duplicate_id_names_second_row() {
        let data = format!("{HEADER}c1,X,2010,true,false,a,b,c\nc1,Y,2011,false,false,a,b,c\n");
        match read_companies("companies.csv", data.as_bytes(), d(2019, 8, 31)).unwrap_err() {
            IngestError::Row { row, kind, .. } => {
                assert_eq!(row, 2);
                assert_eq!(kind, RowError::DuplicateId("c1".into()));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn bad_boolean_and_header() {
        let data = format!("{HEADER}c1,X,2010,yes,false,a,b,c\n");
        let err = read_companies("c", data.as_bytes(), d(2019, 8, 31)).unwrap_err();
        assert!(matches!(err, IngestError::Row { kind: RowError::UnknownBoolean(_), .. }));
        let err = read_companies("c", "id,name\n".as_bytes(), d(2019, 8, 31)).unwrap_err();
        assert!(matches!(err, IngestError::Header { .. }));
    }

    #[test]
    fn founding_date_resolution() {
        assert_eq!(resolve_founding_date("2012").unwrap(), d(2012, 1, 1));
        assert_eq!(resolve_founding_date("2012-06-15").unwrap(), d(2012, 6, 15));
        assert!(resolve_founding_date("June 2012").is_err());
        assert!(resolve_founding_date("12").is_err());
    }

    fn round(v: f64) -> ValuationRound {
        ValuationRound {
            company_id: "c".into(),
            date: d(2010, 1, 1),
            valuation: v,
        }
    }

    #[test]
    fn unicorn_boundary() {
        assert!(derive_unicorn(&[round(200.0), round(1500.0)]).unwrap());
        assert!(!derive_unicorn(&[round(999.99)]).unwrap());
        assert!(derive_unicorn(&[round(1000.0)]).unwrap());
        assert!(matches!(derive_unicorn(&[]), Err(IngestError::EmptyRounds)));
    }

    #[test]
    fn valuations_grouped_and_sorted() {
        let data = "company_id,date,valuation_musd\n\
                    c1,2012-01-01,1100\nc2,2011-01-01,5\nc1,2010-01-01,10\nc1,2011-01-01,50\nc2,2010-01-01,3\n";
        let v = read_valuations("v", data.as_bytes()).unwrap();
        assert_eq!(v.len(), 2);
        let c1 = &v["c1"];
        assert_eq!(c1.rounds.iter().map(|r| r.valuation).collect::<Vec<_>>(), vec![10.0, 50.0, 1100.0]);
        assert!(c1.is_unicorn);
        assert!(!v["c2"].is_unicorn);
    }

    #[test]
    fn valuation_errors() {
        let neg = "company_id,date,valuation_musd\nc1,2010-01-01,-5\n";
        assert!(matches!(
            read_valuations("v", neg.as_bytes()).unwrap_err(),
            IngestError::Row { kind: RowError::NonPositiveValuation(_), .. }
        ));
        let dup = "company_id,date,valuation_musd\nc1,2010-01-01,5\nc1,2010-01-01,6\n";
        assert!(matches!(
            read_valuations("v", dup.as_bytes()).unwrap_err(),
            IngestError::Row { row: 2, kind: RowError::DuplicateRound { .. }, .. }
        ));
    }

    #[test]
    fn gt_export_tokens() {
        let data = "week,value\n2014-03-02,42\n2014-03-09,<1\n2014-03-16,100\n";
        let w = read_gt_export("x", "c1", 0, data.as_bytes()).unwrap();
        assert_eq!(w.points[0], GtPoint { week: d(2014, 3, 2), value: 42.0 });
        assert_eq!(w.points[1].value, 0.0);
        assert!(!w.fragment);
    }

    #[test]
    fn gt_export_errors() {
        let gap = "week,value\n2014-03-02,42\n2014-03-10,50\n";
        assert!(matches!(
            read_gt_export("x", "c", 0, gap.as_bytes()).unwrap_err(),
            IngestError::Row { kind: RowError::NonWeeklySpacing { .. }, .. }
        ));
        let range = "week,value\n2014-03-02,101\n";
        assert!(matches!(
            read_gt_export("x", "c", 0, range.as_bytes()).unwrap_err(),
            IngestError::Row { kind: RowError::ValueOutOfRange(_), .. }
        ));
        let mut long = String::from("week,value\n");
        let start = d(2010, 1, 3);
        for k in 0..201 {
            long.push_str(&format!("{},{}\n", start + chrono::Duration::weeks(k), k % 101));
        }
        let err = read_gt_export("x", "c", 0, long.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("window exceeds 200 points"), "{err}");
    }

    #[test]
    fn window_file_names() {
        assert_eq!(parse_window_file_name("c1.w0.csv"), Some(("c1".into(), 0)));
        assert_eq!(parse_window_file_name("acme.inc.w12.csv"), Some(("acme.inc".into(), 12)));
        assert_eq!(parse_window_file_name("c1.csv"), None);
        assert_eq!(parse_window_file_name("c1.wx.csv"), None);
    }

    #[test]
    fn founding_warnings_list_exactly_violators() {
        let mk = |id: &str, founded| CompanyRecord {
            id: id.into(),
            name: id.into(),
            founded,
            is_b2c: false,
            is_platform: false,
            sector: String::new(),
            industry: String::new(),
            sub_industry: String::new(),
        };
        let companies = vec![mk("a", d(2010, 1, 1)), mk("b", d(2012, 1, 1))];
        let mut vals = BTreeMap::new();
        for (id, date) in [("a", d(2011, 1, 1)), ("b", d(2011, 6, 1))] {
            vals.insert(
                id.to_string(),
                ValuationSeries::from_rounds(id, vec![ValuationRound { company_id: id.into(), date, valuation: 1.0 }]).unwrap(),
            );
        }
        assert_eq!(founding_date_warnings(&companies, &vals), vec!["b".to_string()]);
    }
}
