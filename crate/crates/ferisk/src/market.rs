//! From daily close prices to prospects.
//!
//! The pipeline is: closes -> daily log returns -> one uniform bin grid over
//! the pooled return range -> per-ticker histogram prospects whose
//! probabilities are bin frequencies and whose payoffs are in-bin mean
//! returns. Using one shared grid keeps every ticker's prospect on the same
//! payoff scale, which the risk normalizers rely on.

use std::collections::HashSet;
use std::io::{BufWriter, Write};
use std::path::Path;

use chrono::NaiveDate;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::prospect::Prospect;
use crate::rng::Rng;

const DATE_FORMAT: &str = "%Y-%m-%d";

/// Daily close prices for a set of tickers on a shared date axis.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePanel {
    tickers: Vec<String>,
    dates: Vec<NaiveDate>,
    /// `closes[i][t]` = close of `tickers[i]` on `dates[t]`.
    closes: Vec<Vec<f64>>,
}

impl PricePanel {
    pub fn new(tickers: Vec<String>, dates: Vec<NaiveDate>, closes: Vec<Vec<f64>>) -> Result<Self> {
        if tickers.is_empty() {
            return Err(Error::Ingestion("no tickers".into()));
        }
        let mut seen = HashSet::new();
        for t in &tickers {
            if t.is_empty() {
                return Err(Error::Ingestion("empty ticker name".into()));
            }
            if !seen.insert(t.as_str()) {
                return Err(Error::Ingestion(format!("duplicate ticker {t}")));
            }
        }
        if dates.len() < 2 {
            return Err(Error::Ingestion(format!(
                "need at least 2 dates to form returns, got {}",
                dates.len()
            )));
        }
        for w in dates.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Ingestion(format!(
                    "dates not strictly increasing: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if closes.len() != tickers.len() {
            return Err(Error::Ingestion(format!(
                "{} tickers but {} close series",
                tickers.len(),
                closes.len()
            )));
        }
        for (ticker, series) in tickers.iter().zip(&closes) {
            if series.len() != dates.len() {
                return Err(Error::Ingestion(format!(
                    "{ticker}: {} closes for {} dates",
                    series.len(),
                    dates.len()
                )));
            }
            for (&close, date) in series.iter().zip(&dates) {
                if !close.is_finite() || close <= 0.0 {
                    return Err(Error::Ingestion(format!(
                        "{ticker} {date}: close {close} is not a positive number"
                    )));
                }
            }
        }
        Ok(PricePanel {
            tickers,
            dates,
            closes,
        })
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn closes(&self) -> &[Vec<f64>] {
        &self.closes
    }

    /// Drop every ticker not named in `allow`. Errors if nothing remains.
    pub fn restrict(&self, allow: &[String]) -> Result<PricePanel> {
        let allowed: HashSet<&str> = allow.iter().map(|s| s.as_str()).collect();
        let mut tickers = Vec::new();
        let mut closes = Vec::new();
        for (t, series) in self.tickers.iter().zip(&self.closes) {
            if allowed.contains(t.as_str()) {
                tickers.push(t.clone());
                closes.push(series.clone());
            }
        }
        if tickers.is_empty() {
            return Err(Error::Ingestion(
                "allow-list removed every ticker from the panel".into(),
            ));
        }
        PricePanel::new(tickers, self.dates.clone(), closes)
    }

    /// Daily log returns `ln(p_t / p_{t-1})` with the pooled min/max.
    pub fn log_returns(&self) -> Result<ReturnPanel> {
        let mut returns = Vec::with_capacity(self.tickers.len());
        let mut r_min = f64::INFINITY;
        let mut r_max = f64::NEG_INFINITY;
        for series in &self.closes {
            let rs: Vec<f64> = series.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
            for &r in &rs {
                r_min = r_min.min(r);
                r_max = r_max.max(r);
            }
            returns.push(rs);
        }
        if r_min >= r_max {
            return Err(Error::Ingestion(
                "all returns are identical; no usable return range".into(),
            ));
        }
        Ok(ReturnPanel {
            tickers: self.tickers.clone(),
            returns,
            r_min,
            r_max,
        })
    }
}

/// Per-ticker daily log returns plus the pooled range.
#[derive(Debug, Clone)]
pub struct ReturnPanel {
    tickers: Vec<String>,
    returns: Vec<Vec<f64>>,
    r_min: f64,
    r_max: f64,
}

impl ReturnPanel {
    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn returns(&self) -> &[Vec<f64>] {
        &self.returns
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// Uniform grid with `bins` bins over the pooled return range.
    pub fn grid(&self, bins: usize) -> Result<BinGrid> {
        make_bin_grid(self.r_min, self.r_max, bins)
    }

    /// Histogram prospect per ticker on a shared grid.
    ///
    /// Tickers are independent, so they are binned in parallel; the output
    /// order is the panel's ticker order regardless of scheduling.
    pub fn prospects(&self, grid: &BinGrid) -> Result<Vec<Prospect>> {
        self.tickers
            .par_iter()
            .zip(self.returns.par_iter())
            .map(|(ticker, rs)| bin_prospect(ticker, rs, grid))
            .collect()
    }
}

/// A uniform one-dimensional bin grid.
///
/// Bin `k` covers `[edge_k, edge_{k+1})`; the last bin is closed on the right
/// so the grid covers `[r_min, r_max]` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct BinGrid {
    edges: Vec<f64>,
    width: f64,
}

/// Build a uniform grid of `bins` bins spanning `[r_min, r_max]`.
pub fn make_bin_grid(r_min: f64, r_max: f64, bins: usize) -> Result<BinGrid> {
    if bins == 0 {
        return Err(Error::Domain("bin count must be at least 1".into()));
    }
    if !r_min.is_finite() || !r_max.is_finite() || r_min >= r_max {
        return Err(Error::Domain(format!(
            "invalid bin range [{r_min}, {r_max}]"
        )));
    }
    let width = (r_max - r_min) / bins as f64;
    let mut edges: Vec<f64> = (0..bins).map(|k| r_min + k as f64 * width).collect();
    // Pin the top edge so accumulated rounding never shrinks the range.
    edges.push(r_max);
    Ok(BinGrid { edges, width })
}

impl BinGrid {
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn bin_count(&self) -> usize {
        self.edges.len() - 1
    }

    /// Common bin width `(r_max - r_min) / bins`.
    pub fn width(&self) -> f64 {
        self.width
    }

    /// Index of the bin containing `r`, or `None` outside `[r_min, r_max]`.
    pub fn bin_index(&self, r: f64) -> Option<usize> {
        let last = self.edges.len() - 1;
        if !r.is_finite() || r < self.edges[0] || r > self.edges[last] {
            return None;
        }
        if r >= self.edges[last - 1] {
            return Some(last - 1);
        }
        Some(self.edges.partition_point(|&e| e <= r) - 1)
    }
}

/// Histogram prospect of a return series on `grid`: probability = bin
/// frequency, payoff = mean return within the bin, empty bins dropped.
pub fn bin_prospect(label: &str, returns: &[f64], grid: &BinGrid) -> Result<Prospect> {
    if returns.is_empty() {
        return Err(Error::Ingestion(format!("{label}: no returns to bin")));
    }
    let bins = grid.bin_count();
    let mut counts = vec![0usize; bins];
    let mut sums = vec![0.0f64; bins];
    for &r in returns {
        let k = grid.bin_index(r).ok_or_else(|| {
            Error::Ingestion(format!(
                "{label}: return {r} falls outside the grid [{}, {}]",
                grid.edges[0], grid.edges[bins]
            ))
        })?;
        counts[k] += 1;
        sums[k] += r;
    }
    let t = returns.len() as f64;
    let outcomes: Vec<(f64, f64)> = (0..bins)
        .filter(|&k| counts[k] > 0)
        .map(|k| (sums[k] / counts[k] as f64, counts[k] as f64 / t))
        .collect();
    Prospect::new(label, outcomes)
}

/// Layout of a close-price CSV file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsvFormat {
    /// `date,ticker,close`, one observation per row.
    Long,
    /// `date,<ticker>,<ticker>,...`, one date per row.
    Wide,
}

/// Load a close-price CSV.
///
/// Dates must be ISO-8601 and strictly increasing per ticker; every ticker
/// must cover exactly the same dates (gaps are treated as data errors, not
/// imputed). `allow` optionally restricts the panel to the named tickers.
pub fn load_price_csv(
    path: impl AsRef<Path>,
    format: CsvFormat,
    allow: Option<&[String]>,
) -> Result<PricePanel> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let panel = match format {
        CsvFormat::Long => read_long(path, &mut reader)?,
        CsvFormat::Wide => read_wide(path, &mut reader)?,
    };
    match allow {
        Some(list) => panel.restrict(list),
        None => Ok(panel),
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::Ingestion(format!("{}: {e}", path.display()))
}

fn parse_date(path: &Path, line: u64, text: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(text, DATE_FORMAT).map_err(|_| {
        Error::Ingestion(format!(
            "{} line {line}: bad date {text:?} (expected YYYY-MM-DD)",
            path.display()
        ))
    })
}

fn parse_close(path: &Path, line: u64, text: &str) -> Result<f64> {
    text.parse::<f64>().map_err(|_| {
        Error::Ingestion(format!(
            "{} line {line}: bad close {text:?}",
            path.display()
        ))
    })
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

fn read_long(path: &Path, reader: &mut csv::Reader<std::fs::File>) -> Result<PricePanel> {
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let expected = ["date", "ticker", "close"];
    let found: Vec<String> = headers.iter().map(|h| h.to_ascii_lowercase()).collect();
    if found != expected {
        return Err(Error::Ingestion(format!(
            "{}: expected header date,ticker,close but found {}",
            path.display(),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut order: Vec<String> = Vec::new();
    let mut series: std::collections::HashMap<String, (Vec<NaiveDate>, Vec<f64>)> =
        std::collections::HashMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record_line(&record);
        if record.len() != 3 {
            return Err(Error::Ingestion(format!(
                "{} line {line}: expected 3 fields, found {}",
                path.display(),
                record.len()
            )));
        }
        let date = parse_date(path, line, &record[0])?;
        let ticker = record[1].to_string();
        if ticker.is_empty() {
            return Err(Error::Ingestion(format!(
                "{} line {line}: empty ticker",
                path.display()
            )));
        }
        let close = parse_close(path, line, &record[2])?;
        let entry = series.entry(ticker.clone()).or_insert_with(|| {
            order.push(ticker.clone());
            (Vec::new(), Vec::new())
        });
        if let Some(&last) = entry.0.last() {
            if date <= last {
                return Err(Error::Ingestion(format!(
                    "{} line {line}: {ticker} dates not strictly increasing ({last} then {date})",
                    path.display()
                )));
            }
        }
        entry.0.push(date);
        entry.1.push(close);
    }
    let first = order
        .first()
        .ok_or_else(|| Error::Ingestion(format!("{}: no data rows", path.display())))?;
    let dates = series[first].0.clone();
    let mut closes = Vec::with_capacity(order.len());
    for ticker in &order {
        let (ticker_dates, ticker_closes) = &series[ticker];
        if *ticker_dates != dates {
            return Err(Error::Ingestion(format!(
                "{}: ticker {ticker} covers {} dates but {first} covers {}; all tickers must share one date axis",
                path.display(),
                ticker_dates.len(),
                dates.len()
            )));
        }
        closes.push(ticker_closes.clone());
    }
    PricePanel::new(order, dates, closes)
}

fn read_wide(path: &Path, reader: &mut csv::Reader<std::fs::File>) -> Result<PricePanel> {
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if headers.len() < 2 || !headers[0].eq_ignore_ascii_case("date") {
        return Err(Error::Ingestion(format!(
            "{}: wide format needs a leading date column plus one column per ticker",
            path.display()
        )));
    }
    let tickers: Vec<String> = headers.iter().skip(1).map(|h| h.to_string()).collect();
    let mut dates = Vec::new();
    let mut closes: Vec<Vec<f64>> = vec![Vec::new(); tickers.len()];
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record_line(&record);
        if record.len() != tickers.len() + 1 {
            return Err(Error::Ingestion(format!(
                "{} line {line}: expected {} fields, found {}",
                path.display(),
                tickers.len() + 1,
                record.len()
            )));
        }
        let date = parse_date(path, line, &record[0])?;
        if let Some(&last) = dates.last() {
            if date <= last {
                return Err(Error::Ingestion(format!(
                    "{} line {line}: dates not strictly increasing ({last} then {date})",
                    path.display()
                )));
            }
        }
        dates.push(date);
        for (i, field) in record.iter().skip(1).enumerate() {
            closes[i].push(parse_close(path, line, field)?);
        }
    }
    PricePanel::new(tickers, dates, closes)
}

/// Write a panel back to CSV in the given layout.
///
/// Floats use shortest round-trip formatting, so `load_price_csv` recovers
/// the panel bit for bit.
pub fn write_price_csv(
    panel: &PricePanel,
    path: impl AsRef<Path>,
    format: CsvFormat,
) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let write = |out: &mut BufWriter<std::fs::File>, text: String| {
        out.write_all(text.as_bytes())
            .map_err(|e| Error::io(path, e))
    };
    match format {
        CsvFormat::Long => {
            write(&mut out, "date,ticker,close\n".to_string())?;
            for (t, date) in panel.dates.iter().enumerate() {
                for (i, ticker) in panel.tickers.iter().enumerate() {
                    write(
                        &mut out,
                        format!(
                            "{},{},{}\n",
                            date.format(DATE_FORMAT),
                            ticker,
                            panel.closes[i][t]
                        ),
                    )?;
                }
            }
        }
        CsvFormat::Wide => {
            write(&mut out, format!("date,{}\n", panel.tickers.join(",")))?;
            for (t, date) in panel.dates.iter().enumerate() {
                let row: Vec<String> = panel
                    .closes
                    .iter()
                    .map(|series| series[t].to_string())
                    .collect();
                write(
                    &mut out,
                    format!("{},{}\n", date.format(DATE_FORMAT), row.join(",")),
                )?;
            }
        }
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Synthetic close-price panel from a seeded geometric random walk.
///
/// Ticker `i` follows `p_t = p_{t-1} exp(vol * z)` with standard normal `z`
/// drawn from stream `i` of `seed`, starting at 100. Equal seeds give
/// bit-identical panels.
pub fn synth_panel(seed: u64, tickers: usize, days: usize, vol: f64) -> Result<PricePanel> {
    if tickers == 0 {
        return Err(Error::Domain("need at least one ticker".into()));
    }
    if days < 2 {
        return Err(Error::Domain("need at least two days".into()));
    }
    if !vol.is_finite() || vol <= 0.0 {
        return Err(Error::Domain(format!("volatility {vol} must be positive")));
    }
    let width = (tickers as f64).log10().floor() as usize + 1;
    let names: Vec<String> = (1..=tickers)
        .map(|i| format!("S{i:0w$}", w = width.max(2)))
        .collect();
    let start = NaiveDate::from_ymd_opt(2021, 1, 1).expect("valid date");
    let dates: Vec<NaiveDate> = (0..days as i64)
        .map(|t| start + chrono::Duration::days(t))
        .collect();
    let closes: Vec<Vec<f64>> = (0..tickers)
        .map(|i| {
            let mut rng = Rng::derive(seed, i as u64);
            let mut price = 100.0;
            let mut series = Vec::with_capacity(days);
            series.push(price);
            for _ in 1..days {
                price *= (vol * rng.next_normal()).exp();
                series.push(price);
            }
            series
        })
        .collect();
    PricePanel::new(names, dates, closes)
}

/// The 48 ticker symbols shipped as the default allow-list.
pub fn nifty50_tickers() -> Vec<&'static str> {
    include_str!("../data/nifty50.txt")
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect()
}


#[cfg(test)]
mod csv_tests {
    use super::*;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn long_format_round_trip() {
        let f = write_temp(
            "date,ticker,close\n\
             2021-01-01,AAA,100.0\n\
             2021-01-01,BBB,50.0\n\
             2021-01-02,AAA,101.5\n\
             2021-01-02,BBB,49.75\n",
        );
        let panel = load_price_csv(f.path(), CsvFormat::Long, None).unwrap();
        assert_eq!(panel.tickers(), &["AAA", "BBB"]);
        assert_eq!(panel.closes()[1], vec![50.0, 49.75]);

        let out = tempfile::NamedTempFile::new().unwrap();
        write_price_csv(&panel, out.path(), CsvFormat::Long).unwrap();
        let back = load_price_csv(out.path(), CsvFormat::Long, None).unwrap();
        assert_eq!(panel, back);
    }

    #[test]
    fn wide_format_round_trip() {
        let f = write_temp(
            "date,AAA,BBB\n\
             2021-01-01,100.0,50.0\n\
             2021-01-02,101.5,49.75\n",
        );
        let panel = load_price_csv(f.path(), CsvFormat::Wide, None).unwrap();
        assert_eq!(panel.tickers(), &["AAA", "BBB"]);

        let out = tempfile::NamedTempFile::new().unwrap();
        write_price_csv(&panel, out.path(), CsvFormat::Wide).unwrap();
        let back = load_price_csv(out.path(), CsvFormat::Wide, None).unwrap();
        assert_eq!(panel, back);
    }

    #[test]
    fn formats_agree_on_the_same_panel() {
        let panel = synth_panel(11, 4, 25, 0.015).unwrap();
        let long = tempfile::NamedTempFile::new().unwrap();
        let wide = tempfile::NamedTempFile::new().unwrap();
        write_price_csv(&panel, long.path(), CsvFormat::Long).unwrap();
        write_price_csv(&panel, wide.path(), CsvFormat::Wide).unwrap();
        let a = load_price_csv(long.path(), CsvFormat::Long, None).unwrap();
        let b = load_price_csv(wide.path(), CsvFormat::Wide, None).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, panel);
    }

    #[test]
    fn allow_list_filters_tickers() {
        let f = write_temp(
            "date,ticker,close\n\
             2021-01-01,AAA,100.0\n\
             2021-01-01,BBB,50.0\n\
             2021-01-02,AAA,101.5\n\
             2021-01-02,BBB,49.75\n",
        );
        let allow = vec!["BBB".to_string()];
        let panel = load_price_csv(f.path(), CsvFormat::Long, Some(&allow)).unwrap();
        assert_eq!(panel.tickers(), &["BBB"]);
        let none = vec!["ZZZ".to_string()];
        assert!(load_price_csv(f.path(), CsvFormat::Long, Some(&none)).is_err());
    }

    #[test]
    fn bad_rows_are_reported_with_line_numbers() {
        let cases = [
            ("date,ticker,close\n2021-01-01,AAA,abc\n", "line 2"),
            ("date,ticker,close\n01/02/2021,AAA,1.0\n", "line 2"),
            (
                "date,ticker,close\n2021-01-02,AAA,1.0\n2021-01-01,AAA,1.0\n",
                "line 3",
            ),
        ];
        for (content, needle) in cases {
            let f = write_temp(content);
            let err = load_price_csv(f.path(), CsvFormat::Long, None).unwrap_err();
            let msg = err.to_string();
            assert!(msg.contains(needle), "{msg:?} missing {needle:?}");
        }
    }

    #[test]
    fn mismatched_date_axes_are_rejected() {
        let f = write_temp(
            "date,ticker,close\n\
             2021-01-01,AAA,100.0\n\
             2021-01-02,AAA,101.0\n\
             2021-01-01,BBB,50.0\n",
        );
        assert!(load_price_csv(f.path(), CsvFormat::Long, None).is_err());
    }

    #[test]
    fn wrong_header_is_rejected() {
        let f = write_temp("day,symbol,price\n2021-01-01,AAA,1.0\n");
        assert!(load_price_csv(f.path(), CsvFormat::Long, None).is_err());
    }
}
