//! The assembled multi-population mortality grid.

use std::collections::HashMap;
use std::io::{self, BufRead, Write};

use statrs::function::gamma::ln_gamma;

use super::{DataError, PopulationSource};

/// `(population, age, year)` index triple into a [`MortalityDataset`] grid.
pub type CellKey = (usize, usize, usize);

/// Deaths and exposures on a dense `population x age x year` grid.
///
/// Ages and years are gap-free consecutive integer sequences; every
/// population covers the identical grid. Cells without usable data (missing
/// source values or non-positive exposure) are masked and contribute nothing
/// to likelihood sums.
#[derive(Debug, Clone, PartialEq)]
pub struct MortalityDataset {
    populations: Vec<String>,
    ages: Vec<u32>,
    years: Vec<i32>,
    deaths: Vec<u64>,
    exposures: Vec<f64>,
    missing: Vec<bool>,
    /// ln(D!) per cell, cached once; constant along the whole chain.
    log_death_fact: Vec<f64>,
    /// ln(E) per cell (0 on masked cells), cached for the likelihood loop.
    log_exposures: Vec<f64>,
}

fn check_consecutive<T: Copy + Into<i64>>(xs: &[T], what: &str) -> Result<(), DataError> {
    if xs.is_empty() {
        return Err(DataError::Invalid(format!("{what} sequence is empty")));
    }
    for pair in xs.windows(2) {
        if pair[1].into() != pair[0].into() + 1 {
            return Err(DataError::Invalid(format!(
                "{what} sequence has a gap between {} and {}",
                pair[0].into(),
                pair[1].into()
            )));
        }
    }
    Ok(())
}

impl MortalityDataset {
    pub fn new(
        populations: Vec<String>,
        ages: Vec<u32>,
        years: Vec<i32>,
        deaths: Vec<u64>,
        exposures: Vec<f64>,
        missing: Vec<bool>,
    ) -> Result<Self, DataError> {
        check_consecutive(&ages, "age")?;
        check_consecutive(&years, "year")?;
        if populations.is_empty() {
            return Err(DataError::Invalid("no populations".into()));
        }
        for label in &populations {
            if label.is_empty() || label.contains(',') || label.contains('\n') {
                return Err(DataError::Invalid(format!("invalid population label {label:?}")));
            }
        }
        for (a, b) in populations.iter().enumerate().flat_map(|(k, a)| {
            populations[k + 1..].iter().map(move |b| (a, b))
        }) {
            if a == b {
                return Err(DataError::Invalid(format!("duplicate population label {a:?}")));
            }
        }
        let n_cells = populations.len() * ages.len() * years.len();
        if deaths.len() != n_cells || exposures.len() != n_cells || missing.len() != n_cells {
            return Err(DataError::Invalid(format!(
                "grid size mismatch: expected {n_cells} cells, got {}/{}/{}",
                deaths.len(),
                exposures.len(),
                missing.len()
            )));
        }
        for idx in 0..n_cells {
            if !missing[idx] && !(exposures[idx] > 0.0 && exposures[idx].is_finite()) {
                return Err(DataError::Invalid(format!(
                    "non-missing cell {idx} has non-positive exposure {}",
                    exposures[idx]
                )));
            }
        }
        let log_death_fact = deaths.iter().map(|&d| ln_gamma(d as f64 + 1.0)).collect();
        let log_exposures = exposures
            .iter()
            .zip(&missing)
            .map(|(&e, &m)| if m { 0.0 } else { e.ln() })
            .collect();
        Ok(Self { populations, ages, years, deaths, exposures, missing, log_death_fact, log_exposures })
    }

    pub fn n_pops(&self) -> usize {
        self.populations.len()
    }

    pub fn n_ages(&self) -> usize {
        self.ages.len()
    }

    pub fn n_years(&self) -> usize {
        self.years.len()
    }

    pub fn populations(&self) -> &[String] {
        &self.populations
    }

    pub fn ages(&self) -> &[u32] {
        &self.ages
    }

    pub fn years(&self) -> &[i32] {
        &self.years
    }

    /// Time coordinate used by the drift design and the AR(1) recursions:
    /// `1..=N`, so that the first forecast year is `N + 1`.
    pub fn model_times(&self) -> Vec<f64> {
        (1..=self.years.len()).map(|t| t as f64).collect()
    }

    #[inline]
    pub fn idx(&self, pop: usize, age: usize, year: usize) -> usize {
        debug_assert!(pop < self.n_pops() && age < self.n_ages() && year < self.n_years());
        (pop * self.ages.len() + age) * self.years.len() + year
    }

    #[inline]
    pub fn deaths(&self, pop: usize, age: usize, year: usize) -> u64 {
        self.deaths[self.idx(pop, age, year)]
    }

    #[inline]
    pub fn exposure(&self, pop: usize, age: usize, year: usize) -> f64 {
        self.exposures[self.idx(pop, age, year)]
    }

    /// Whether the cell carries usable data (not masked).
    #[inline]
    pub fn is_active(&self, pop: usize, age: usize, year: usize) -> bool {
        !self.missing[self.idx(pop, age, year)]
    }

    #[inline]
    pub fn log_death_factorial(&self, pop: usize, age: usize, year: usize) -> f64 {
        self.log_death_fact[self.idx(pop, age, year)]
    }

    /// Cached `ln(E)`; only meaningful on active cells.
    #[inline]
    pub fn log_exposure(&self, pop: usize, age: usize, year: usize) -> f64 {
        self.log_exposures[self.idx(pop, age, year)]
    }

    /// Observed central rate D/E; `None` on masked cells.
    pub fn observed_rate(&self, pop: usize, age: usize, year: usize) -> Option<f64> {
        if self.is_active(pop, age, year) {
            Some(self.deaths(pop, age, year) as f64 / self.exposure(pop, age, year))
        } else {
            None
        }
    }

    /// Number of non-masked cells for one population.
    pub fn active_cell_count(&self, pop: usize) -> usize {
        (0..self.n_ages())
            .flat_map(|x| (0..self.n_years()).map(move |t| (x, t)))
            .filter(|&(x, t)| self.is_active(pop, x, t))
            .count()
    }

    pub fn age_index(&self, age: u32) -> Option<usize> {
        self.ages.iter().position(|&a| a == age)
    }

    pub fn year_index(&self, year: i32) -> Option<usize> {
        self.years.iter().position(|&y| y == year)
    }

    pub fn population_index(&self, label: &str) -> Option<usize> {
        self.populations.iter().position(|p| p == label)
    }

    /// Canonical CSV export: `population,age,year,deaths,exposure,missing`,
    /// one row per cell in (population, age, year) order, LF line endings.
    pub fn write_canonical_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        out.write_all(b"population,age,year,deaths,exposure,missing\n")?;
        for (i, pop) in self.populations.iter().enumerate() {
            for (xi, &age) in self.ages.iter().enumerate() {
                for (ti, &year) in self.years.iter().enumerate() {
                    let idx = self.idx(i, xi, ti);
                    writeln!(
                        out,
                        "{},{},{},{},{},{}",
                        pop,
                        age,
                        year,
                        self.deaths[idx],
                        self.exposures[idx],
                        u8::from(self.missing[idx])
                    )?;
                }
            }
        }
        Ok(())
    }

    /// Read the canonical CSV format back. Leading `#` comment lines are
    /// tolerated so annotated exports round-trip.
    pub fn read_canonical_csv<R: BufRead>(reader: R) -> Result<Self, DataError> {
        let mut lines = reader.lines().enumerate();
        let header = loop {
            match lines.next() {
                Some((no, line)) => {
                    let line = line?;
                    if line.starts_with('#') || line.trim().is_empty() {
                        continue;
                    }
                    break (no + 1, line);
                }
                None => return Err(DataError::Invalid("empty canonical CSV".into())),
            }
        };
        if header.1.trim() != "population,age,year,deaths,exposure,missing" {
            return Err(DataError::Parse {
                line: header.0,
                msg: format!("unexpected header {:?}", header.1),
            });
        }

        struct Row {
            pop: String,
            age: u32,
            year: i32,
            deaths: u64,
            exposure: f64,
            missing: bool,
        }
        let mut rows = Vec::new();
        for (no, line) in lines {
            let line_no = no + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(DataError::Parse {
                    line: line_no,
                    msg: format!("expected 6 fields, found {}", f.len()),
                });
            }
            let bad = |what: &str| DataError::Parse {
                line: line_no,
                msg: format!("unparseable {what}: {line:?}"),
            };
            rows.push(Row {
                pop: f[0].to_string(),
                age: f[1].parse().map_err(|_| bad("age"))?,
                year: f[2].parse().map_err(|_| bad("year"))?,
                deaths: f[3].parse().map_err(|_| bad("deaths"))?,
                exposure: f[4].parse().map_err(|_| bad("exposure"))?,
                missing: match f[5] {
                    "0" | "false" => false,
                    "1" | "true" => true,
                    _ => return Err(bad("missing flag")),
                },
            });
        }
        if rows.is_empty() {
            return Err(DataError::Invalid("canonical CSV has no data rows".into()));
        }

        let mut populations: Vec<String> = Vec::new();
        let mut ages: Vec<u32> = Vec::new();
        let mut years: Vec<i32> = Vec::new();
        for row in &rows {
            if !populations.contains(&row.pop) {
                populations.push(row.pop.clone());
            }
            if !ages.contains(&row.age) {
                ages.push(row.age);
            }
            if !years.contains(&row.year) {
                years.push(row.year);
            }
        }
        ages.sort_unstable();
        years.sort_unstable();

        let n_cells = populations.len() * ages.len() * years.len();
        if rows.len() != n_cells {
            return Err(DataError::Invalid(format!(
                "expected a dense grid of {n_cells} rows, found {}",
                rows.len()
            )));
        }
        let mut deaths = vec![0u64; n_cells];
        let mut exposures = vec![0f64; n_cells];
        let mut missing = vec![true; n_cells];
        let mut seen = vec![false; n_cells];
        for row in &rows {
            let i = populations.iter().position(|p| *p == row.pop).unwrap();
            let xi = ages.iter().position(|&a| a == row.age).unwrap();
            let ti = years.iter().position(|&y| y == row.year).unwrap();
            let idx = (i * ages.len() + xi) * years.len() + ti;
            if seen[idx] {
                return Err(DataError::Invalid(format!(
                    "duplicate cell ({}, {}, {})",
                    row.pop, row.age, row.year
                )));
            }
            seen[idx] = true;
            deaths[idx] = row.deaths;
            exposures[idx] = row.exposure;
            missing[idx] = row.missing;
        }
        Self::new(populations, ages, years, deaths, exposures, missing)
    }
}

/// Build the dense training grid from parsed per-population tables.
///
/// Deaths are rounded half-up to integers (HMD publishes fractional split
/// counts). Cells whose source value is missing or whose exposure is not
/// strictly positive are masked. A `(population, age, year)` combination
/// absent from the source tables is an assembly error.
pub fn assemble_dataset(
    sources: &[PopulationSource],
    age_range: (u32, u32),
    year_range: (i32, i32),
) -> Result<MortalityDataset, DataError> {
    if sources.is_empty() {
        return Err(DataError::Config("no populations supplied".into()));
    }
    if age_range.0 > age_range.1 || year_range.0 > year_range.1 {
        return Err(DataError::Config("empty age or year window".into()));
    }
    let ages: Vec<u32> = (age_range.0..=age_range.1).collect();
    let years: Vec<i32> = (year_range.0..=year_range.1).collect();
    let n_cells = sources.len() * ages.len() * years.len();

    let mut deaths = vec![0u64; n_cells];
    let mut exposures = vec![0f64; n_cells];
    let mut missing = vec![false; n_cells];
    let mut absent: Vec<String> = Vec::new();

    for (i, src) in sources.iter().enumerate() {
        let dmap: HashMap<(i32, u32), Option<f64>> =
            src.deaths.iter().map(|r| ((r.year, r.age), r.value)).collect();
        let emap: HashMap<(i32, u32), Option<f64>> =
            src.exposures.iter().map(|r| ((r.year, r.age), r.value)).collect();
        for (xi, &age) in ages.iter().enumerate() {
            for (ti, &year) in years.iter().enumerate() {
                let idx = (i * ages.len() + xi) * years.len() + ti;
                let d = dmap.get(&(year, age));
                let e = emap.get(&(year, age));
                let (d, e) = match (d, e) {
                    (Some(d), Some(e)) => (*d, *e),
                    _ => {
                        absent.push(format!("({}, {age}, {year})", src.label));
                        continue;
                    }
                };
                match (d, e) {
                    (Some(d), Some(e)) if e > 0.0 => {
                        if d < 0.0 {
                            return Err(DataError::Invalid(format!(
                                "negative death count {d} at ({}, {age}, {year})",
                                src.label
                            )));
                        }
                        deaths[idx] = d.round() as u64;
                        exposures[idx] = e;
                    }
                    _ => missing[idx] = true,
                }
            }
        }
    }

    if !absent.is_empty() {
        let preview = absent.iter().take(10).cloned().collect::<Vec<_>>().join(", ");
        return Err(DataError::Assembly { count: absent.len(), preview });
    }

    MortalityDataset::new(
        sources.iter().map(|s| s.label.clone()).collect(),
        ages,
        years,
        deaths,
        exposures,
        missing,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::HmdRecord;

    fn rec(year: i32, age: u32, value: f64) -> HmdRecord {
        HmdRecord { year, age, value: Some(value) }
    }

    fn tiny_source() -> PopulationSource {
        PopulationSource {
            label: "F".into(),
            deaths: vec![rec(2000, 50, 5.0)],
            exposures: vec![rec(2000, 50, 100.0)],
        }
    }

    #[test]
    fn minimal_grid_assembles() {
        let ds = assemble_dataset(&[tiny_source()], (50, 50), (2000, 2000)).unwrap();
        assert_eq!((ds.n_pops(), ds.n_ages(), ds.n_years()), (1, 1, 1));
        assert_eq!(ds.deaths(0, 0, 0), 5);
        assert_eq!(ds.exposure(0, 0, 0), 100.0);
        assert!(ds.is_active(0, 0, 0));
    }

    #[test]
    fn fractional_deaths_round_half_up() {
        let mut src = tiny_source();
        src.deaths[0].value = Some(12.6);
        let ds = assemble_dataset(&[src], (50, 50), (2000, 2000)).unwrap();
        assert_eq!(ds.deaths(0, 0, 0), 13);

        let mut src = tiny_source();
        src.deaths[0].value = Some(12.5);
        let ds = assemble_dataset(&[src], (50, 50), (2000, 2000)).unwrap();
        assert_eq!(ds.deaths(0, 0, 0), 13);
    }

    #[test]
    fn absent_cell_is_assembly_error() {
        let src = tiny_source();
        let err = assemble_dataset(&[src], (50, 51), (2000, 2000)).unwrap_err();
        match err {
            DataError::Assembly { count, preview } => {
                assert_eq!(count, 1);
                assert!(preview.contains("(F, 51, 2000)"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_exposure_is_masked_not_error() {
        let mut src = tiny_source();
        src.exposures[0].value = Some(0.0);
        let ds = assemble_dataset(&[src], (50, 50), (2000, 2000)).unwrap();
        assert!(!ds.is_active(0, 0, 0));
        assert_eq!(ds.observed_rate(0, 0, 0), None);
    }

    #[test]
    fn missing_value_is_masked() {
        let mut src = tiny_source();
        src.deaths[0].value = None;
        let ds = assemble_dataset(&[src], (50, 50), (2000, 2000)).unwrap();
        assert!(!ds.is_active(0, 0, 0));
    }

    #[test]
    fn csv_round_trip_is_identical() {
        let sources = vec![
            PopulationSource {
                label: "F".into(),
                deaths: vec![rec(2000, 50, 5.0), rec(2001, 50, 7.4), rec(2000, 51, 0.0), rec(2001, 51, 3.0)],
                exposures: vec![
                    rec(2000, 50, 100.25),
                    rec(2001, 50, 101.5),
                    HmdRecord { year: 2000, age: 51, value: None },
                    rec(2001, 51, 55.125),
                ],
            },
            PopulationSource {
                label: "M".into(),
                deaths: vec![rec(2000, 50, 6.0), rec(2001, 50, 8.0), rec(2000, 51, 1.0), rec(2001, 51, 2.0)],
                exposures: vec![rec(2000, 50, 90.0), rec(2001, 50, 91.0), rec(2000, 51, 50.0), rec(2001, 51, 51.0)],
            },
        ];
        let ds = assemble_dataset(&sources, (50, 51), (2000, 2001)).unwrap();
        let mut buf = Vec::new();
        ds.write_canonical_csv(&mut buf).unwrap();
        let back = MortalityDataset::read_canonical_csv(buf.as_slice()).unwrap();
        assert_eq!(ds, back);
    }

    #[test]
    fn observed_rate_finite_on_active_cells() {
        let ds = assemble_dataset(&[tiny_source()], (50, 50), (2000, 2000)).unwrap();
        let r = ds.observed_rate(0, 0, 0).unwrap();
        assert!(r.is_finite());
        assert!((r - 0.05).abs() < 1e-15);
    }

    #[test]
    fn model_times_are_one_based() {
        let src = PopulationSource {
            label: "F".into(),
            deaths: vec![rec(1999, 50, 1.0), rec(2000, 50, 1.0)],
            exposures: vec![rec(1999, 50, 10.0), rec(2000, 50, 10.0)],
        };
        let ds = assemble_dataset(&[src], (50, 50), (1999, 2000)).unwrap();
        assert_eq!(ds.model_times(), vec![1.0, 2.0]);
    }
}
