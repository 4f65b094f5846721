//! Turning raw timestamp text into sortable instants.

use chrono::{DateTime, NaiveDate, NaiveDateTime, NaiveTime, Utc};
use serde::{Deserialize, Serialize};

/// Cells inspected when choosing a format.
const SAMPLE_CELLS: usize = 50;

const EPOCH_SECONDS_MIN: i64 = 631_152_000; // 1990-01-01
const EPOCH_SECONDS_MAX: i64 = 4_102_444_800; // 2100-01-01

/// Supported timestamp layouts, in the order they are tried.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TimestampFormat {
    /// `yyyy-mm-ddTHH:MM[:SS[.fff]][Z|±HH:MM]`, `T` or a space between date and time.
    #[serde(rename = "iso8601")]
    Iso8601,
    /// `dd/mm/yyyy HH:MM[:SS]`, optionally with an AM/PM suffix.
    #[serde(rename = "dd/mm/yyyy")]
    DayMonthYear,
    /// `mm/dd/yyyy h:MM[AM|PM]`, seconds and 24-hour clock also accepted.
    #[serde(rename = "mm/dd/yyyy")]
    MonthDayYear,
    /// `yyyy/mm/dd HH:MM:SS`
    #[serde(rename = "yyyy/mm/dd")]
    YearMonthDay,
    /// `dd-mm-yyyy HH:MM:SS`
    #[serde(rename = "dd-mm-yyyy")]
    DayMonthYearDash,
    /// Integer seconds since the Unix epoch, 1990 through 2099.
    #[serde(rename = "epoch_s")]
    EpochSeconds,
    /// Integer milliseconds since the Unix epoch, 1990 through 2099.
    #[serde(rename = "epoch_ms")]
    EpochMillis,
}

impl TimestampFormat {
    pub const ALL: [TimestampFormat; 7] = [
        TimestampFormat::Iso8601,
        TimestampFormat::DayMonthYear,
        TimestampFormat::MonthDayYear,
        TimestampFormat::YearMonthDay,
        TimestampFormat::DayMonthYearDash,
        TimestampFormat::EpochSeconds,
        TimestampFormat::EpochMillis,
    ];

    pub fn id(self) -> &'static str {
        match self {
            TimestampFormat::Iso8601 => "iso8601",
            TimestampFormat::DayMonthYear => "dd/mm/yyyy",
            TimestampFormat::MonthDayYear => "mm/dd/yyyy",
            TimestampFormat::YearMonthDay => "yyyy/mm/dd",
            TimestampFormat::DayMonthYearDash => "dd-mm-yyyy",
            TimestampFormat::EpochSeconds => "epoch_s",
            TimestampFormat::EpochMillis => "epoch_ms",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.id() == id)
    }

    /// Milliseconds since the Unix epoch, or `None` when the cell does not match.
    pub fn parse(self, cell: &str) -> Option<i64> {
        let cell = cell.trim();
        if cell.is_empty() {
            return None;
        }
        let naive = match self {
            TimestampFormat::Iso8601 => return parse_iso(cell),
            TimestampFormat::DayMonthYear => parse_dated(cell, '/', DateOrder::Dmy, false)?,
            TimestampFormat::MonthDayYear => parse_dated(cell, '/', DateOrder::Mdy, false)?,
            TimestampFormat::YearMonthDay => parse_dated(cell, '/', DateOrder::Ymd, true)?,
            TimestampFormat::DayMonthYearDash => parse_dated(cell, '-', DateOrder::Dmy, true)?,
            TimestampFormat::EpochSeconds => {
                let v = parse_integer(cell)?;
                return (EPOCH_SECONDS_MIN..EPOCH_SECONDS_MAX).contains(&v).then(|| v * 1000);
            }
            TimestampFormat::EpochMillis => {
                let v = parse_integer(cell)?;
                return (EPOCH_SECONDS_MIN * 1000..EPOCH_SECONDS_MAX * 1000)
                    .contains(&v)
                    .then_some(v);
            }
        };
        Some(naive.and_utc().timestamp_millis())
    }

    /// Render an instant in this format (UTC). Inverse of [`TimestampFormat::parse`]
    /// up to the format's resolution.
    pub fn render(self, millis: i64) -> String {
        let dt: DateTime<Utc> = DateTime::from_timestamp_millis(millis).unwrap_or_default();
        match self {
            TimestampFormat::Iso8601 => dt.format("%Y-%m-%dT%H:%M:%S%.3f%:z").to_string(),
            TimestampFormat::DayMonthYear => dt.format("%d/%m/%Y %H:%M:%S").to_string(),
            TimestampFormat::MonthDayYear => dt.format("%m/%d/%Y %-I:%M%p").to_string(),
            TimestampFormat::YearMonthDay => dt.format("%Y/%m/%d %H:%M:%S").to_string(),
            TimestampFormat::DayMonthYearDash => dt.format("%d-%m-%Y %H:%M:%S").to_string(),
            TimestampFormat::EpochSeconds => (millis.div_euclid(1000)).to_string(),
            TimestampFormat::EpochMillis => millis.to_string(),
        }
    }
}

/// Result of parsing one column as timestamps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimestampParse {
    /// One entry per input cell, `None` where the cell did not parse.
    pub keys: Vec<Option<i64>>,
    pub parsed_fraction: f64,
    pub format: Option<TimestampFormat>,
}

impl TimestampParse {
    /// Parse with a known format; no selection.
    pub fn with_format(cells: &[String], format: TimestampFormat) -> Self {
        let keys: Vec<Option<i64>> = cells.iter().map(|c| format.parse(c)).collect();
        let parsed = keys.iter().filter(|k| k.is_some()).count();
        let parsed_fraction = if keys.is_empty() {
            0.0
        } else {
            parsed as f64 / keys.len() as f64
        };
        Self {
            keys,
            parsed_fraction,
            format: (parsed > 0).then_some(format),
        }
    }

    fn unparsed(n: usize) -> Self {
        Self {
            keys: vec![None; n],
            parsed_fraction: 0.0,
            format: None,
        }
    }
}

/// Choose the best-matching format on a sample of the column and apply it to every cell.
pub fn parse_timestamp_column(cells: &[String]) -> TimestampParse {
    let sample: Vec<&str> = cells
        .iter()
        .map(|c| c.trim())
        .filter(|c| !c.is_empty())
        .take(SAMPLE_CELLS)
        .collect();
    if sample.is_empty() {
        return TimestampParse::unparsed(cells.len());
    }
    let mut best: Option<(TimestampFormat, usize)> = None;
    for format in TimestampFormat::ALL {
        let hits = sample.iter().filter(|c| format.parse(c).is_some()).count();
        if hits > best.map_or(0, |(_, h)| h) {
            best = Some((format, hits));
        }
    }
    let Some((mut format, _)) = best else {
        return TimestampParse::unparsed(cells.len());
    };
    if matches!(format, TimestampFormat::DayMonthYear | TimestampFormat::MonthDayYear) {
        format = resolve_day_month_order(cells);
    }
    TimestampParse::with_format(cells, format)
}

/// The first cell valid under exactly one of dd/mm and mm/dd decides; dd/mm otherwise.
fn resolve_day_month_order(cells: &[String]) -> TimestampFormat {
    for cell in cells {
        let dmy = TimestampFormat::DayMonthYear.parse(cell).is_some();
        let mdy = TimestampFormat::MonthDayYear.parse(cell).is_some();
        match (dmy, mdy) {
            (true, false) => return TimestampFormat::DayMonthYear,
            (false, true) => return TimestampFormat::MonthDayYear,
            _ => {}
        }
    }
    TimestampFormat::DayMonthYear
}

fn parse_integer(cell: &str) -> Option<i64> {
    if cell.bytes().all(|b| b.is_ascii_digit()) && cell.len() <= 18 {
        cell.parse().ok()
    } else {
        None
    }
}

#[derive(Clone, Copy)]
enum DateOrder {
    Dmy,
    Mdy,
    Ymd,
}

fn parse_dated(cell: &str, sep: char, order: DateOrder, seconds_required: bool) -> Option<NaiveDateTime> {
    let (date_part, time_part) = cell.split_once(char::is_whitespace)?;
    let mut fields = date_part.split(sep);
    let a = fields.next()?;
    let b = fields.next()?;
    let c = fields.next()?;
    if fields.next().is_some() {
        return None;
    }
    let (y, m, d) = match order {
        DateOrder::Dmy => (c, b, a),
        DateOrder::Mdy => (c, a, b),
        DateOrder::Ymd => (a, b, c),
    };
    if y.len() != 4 || m.is_empty() || m.len() > 2 || d.is_empty() || d.len() > 2 {
        return None;
    }
    let date = NaiveDate::from_ymd_opt(digits(y)? as i32, digits(m)?, digits(d)?)?;
    let time = parse_clock(time_part.trim(), seconds_required)?;
    Some(date.and_time(time))
}

/// `H:MM[:SS[.fff]]` with an optional trailing AM/PM marker.
fn parse_clock(text: &str, seconds_required: bool) -> Option<NaiveTime> {
    let lower = text.to_ascii_lowercase();
    let (clock, meridiem) = if let Some(rest) = lower.strip_suffix("am") {
        (rest.trim_end(), Some(false))
    } else if let Some(rest) = lower.strip_suffix("pm") {
        (rest.trim_end(), Some(true))
    } else {
        (lower.as_str(), None)
    };
    let mut parts = clock.split(':');
    let h = parts.next()?;
    let m = parts.next()?;
    let s = parts.next();
    if parts.next().is_some() || h.is_empty() || h.len() > 2 || m.len() != 2 {
        return None;
    }
    if seconds_required && s.is_none() {
        return None;
    }
    let mut hour = digits(h)?;
    let minute = digits(m)?;
    let (second, milli) = match s {
        None => (0, 0),
        Some(s) => {
            let (whole, frac) = match s.split_once('.') {
                Some((w, f)) => (w, Some(f)),
                None => (s, None),
            };
            if whole.len() != 2 {
                return None;
            }
            let milli = match frac {
                None => 0,
                Some(f) if !f.is_empty() && f.len() <= 9 => {
                    let padded = format!("{f:0<3}");
                    digits(&padded[..3])?
                }
                Some(_) => return None,
            };
            (digits(whole)?, milli)
        }
    };
    if let Some(pm) = meridiem {
        if !(1..=12).contains(&hour) {
            return None;
        }
        hour = match (hour, pm) {
            (12, false) => 0,
            (12, true) => 12,
            (h, true) => h + 12,
            (h, false) => h,
        };
    }
    NaiveTime::from_hms_milli_opt(hour, minute, second, milli)
}

fn digits(s: &str) -> Option<u32> {
    if !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) {
        s.parse().ok()
    } else {
        None
    }
}

fn parse_iso(cell: &str) -> Option<i64> {
    if cell.len() < 16 {
        return None;
    }
    let date = NaiveDate::parse_from_str(cell.get(..10)?, "%Y-%m-%d").ok()?;
    let sep = cell.as_bytes()[10];
    if sep != b'T' && sep != b' ' {
        return None;
    }
    let rest = &cell[11..];
    // Split off a zone designator, if any.
    let (clock, offset_secs) = if let Some(c) = rest.strip_suffix('Z').or_else(|| rest.strip_suffix('z')) {
        (c, 0i64)
    } else if let Some(pos) = rest.rfind(['+', '-']) {
        (&rest[..pos], parse_offset(&rest[pos..])?)
    } else {
        (rest, 0)
    };
    let time = parse_iso_clock(clock)?;
    let naive = date.and_time(time);
    Some(naive.and_utc().timestamp_millis() - offset_secs * 1000)
}

fn parse_iso_clock(clock: &str) -> Option<NaiveTime> {
    if clock.to_ascii_lowercase().ends_with('m') {
        return None;
    }
    let hh = clock.get(..2)?;
    if clock.as_bytes().get(2) != Some(&b':') {
        return None;
    }
    parse_clock(clock, false).filter(|_| hh.bytes().all(|b| b.is_ascii_digit()))
}

fn parse_offset(text: &str) -> Option<i64> {
    let sign = match text.as_bytes().first()? {
        b'+' => 1,
        b'-' => -1,
        _ => return None,
    };
    let body = text[1..].replace(':', "");
    let (h, m) = match body.len() {
        2 => (&body[..2], "0"),
        4 => (&body[..2], &body[2..]),
        _ => return None,
    };
    let h = digits(h)? as i64;
    let m = digits(m)? as i64;
    if h > 23 || m > 59 {
        return None;
    }
    Some(sign * (h * 3600 + m * 60))
}
