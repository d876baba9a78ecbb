//! CSV and model-file readers and writers, plus the bundled dataset.

use std::io::{Read, Write};

use dmsc_core::FixedPointSpec;

use crate::error::{AnalyticsError, Result};
use crate::ld::HaplotypeCounts;
use crate::lr::LrModel;

pub const HAPLOTYPE_HEADER: [&str; 4] = ["n_AB", "n_Ab", "n_aB", "n_ab"];

/// Standardized 569 x 30 binary-classification samples with labels.
pub const BUNDLED_SAMPLES_CSV: &str = include_str!("../data/wdbc_standardized.csv");
/// Weights fitted offline on the bundled samples, (16, 8) fixed point.
pub const BUNDLED_MODEL_TXT: &str = include_str!("../data/wdbc_model.txt");

fn parse_err(line: usize, message: impl Into<String>) -> AnalyticsError {
    AnalyticsError::Parse {
        line,
        message: message.into(),
    }
}

pub fn read_haplotype_csv<R: Read>(reader: R) -> Result<Vec<HaplotypeCounts>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != HAPLOTYPE_HEADER {
        return Err(parse_err(1, format!("expected header {}", HAPLOTYPE_HEADER.join(","))));
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let mut v = [0u64; 4];
        for (k, slot) in v.iter_mut().enumerate() {
            let field = rec.get(k).ok_or_else(|| parse_err(line, "missing column"))?;
            *slot = field.parse().map_err(|_| parse_err(line, format!("`{field}` is not a count")))?;
        }
        if rec.len() != 4 {
            return Err(parse_err(line, format!("expected 4 columns, found {}", rec.len())));
        }
        out.push(HaplotypeCounts::from_array(v));
    }
    Ok(out)
}

pub fn write_haplotype_csv<W: Write>(writer: W, counts: &[HaplotypeCounts]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(HAPLOTYPE_HEADER)?;
    for c in counts {
        w.write_record(c.as_array().iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    pub features: Vec<Vec<f64>>,
    pub labels: Option<Vec<u8>>,
}

impl Samples {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }
}

/// Feature columns followed by an optional trailing `label` column.
pub fn read_samples_csv<R: Read>(reader: R) -> Result<Samples> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    let has_label = header.iter().last() == Some("label");
    let dims = header.len() - has_label as usize;
    if dims == 0 {
        return Err(parse_err(1, "no feature columns"));
    }
    let mut features = Vec::new();
    let mut labels = has_label.then(Vec::new);
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() != header.len() {
            return Err(parse_err(line, format!("expected {} columns, found {}", header.len(), rec.len())));
        }
        let row = rec
            .iter()
            .take(dims)
            .map(|f| f.parse::<f64>().map_err(|_| parse_err(line, format!("`{f}` is not a number"))))
            .collect::<Result<Vec<f64>>>()?;
        features.push(row);
        if let Some(l) = labels.as_mut() {
            let f = &rec[dims];
            l.push(f.parse().map_err(|_| parse_err(line, format!("`{f}` is not a label")))?);
        }
    }
    Ok(Samples { features, labels })
}

pub fn write_samples_csv<W: Write>(writer: W, samples: &Samples) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let dims = samples.dims();
    let mut header: Vec<String> = (0..dims).map(|i| format!("x{i}")).collect();
    if samples.labels.is_some() {
        header.push("label".into());
    }
    w.write_record(&header)?;
    for (i, row) in samples.features.iter().enumerate() {
        let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        if let Some(l) = &samples.labels {
            rec.push(l[i].to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Model file: `total_bits frac_bits`, then the bias, then one weight per
/// line. Blank lines and `#` comments are ignored.
pub fn parse_model(text: &str) -> Result<LrModel> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (line, spec_line) = lines.next().ok_or_else(|| parse_err(1, "empty model file"))?;
    let parts: Vec<&str> = spec_line.split_whitespace().collect();
    let nums: Vec<u32> = parts
        .iter()
        .map(|p| p.parse().map_err(|_| parse_err(line, format!("`{p}` is not a bit count"))))
        .collect::<Result<_>>()?;
    if nums.len() != 2 {
        return Err(parse_err(line, "expected `total_bits frac_bits`"));
    }
    let spec = FixedPointSpec::new(nums[0], nums[1])?;
    let mut value = |what: &str| -> Result<Option<f64>> {
        match lines.next() {
            None => Ok(None),
            Some((line, l)) => l
                .parse()
                .map(Some)
                .map_err(|_| parse_err(line, format!("`{l}` is not a {what}"))),
        }
    };
    let bias = value("bias")?.ok_or_else(|| parse_err(line + 1, "missing bias"))?;
    let mut weights = Vec::new();
    while let Some(w) = value("weight")? {
        weights.push(w);
    }
    if weights.is_empty() {
        return Err(parse_err(line + 2, "no weights"));
    }
    LrModel::from_f64(spec, &weights, bias)
}

pub fn model_to_text(model: &LrModel) -> String {
    let mut s = format!("{} {}\n{}\n", model.spec.total_bits(), model.spec.frac_bits(), model.bias_f64());
    for w in model.weights_f64() {
        s.push_str(&format!("{w}\n"));
    }
    s
}

pub fn bundled_samples() -> Samples {
    read_samples_csv(BUNDLED_SAMPLES_CSV.as_bytes()).expect("bundled samples parse")
}

pub fn bundled_model() -> LrModel {
    parse_model(BUNDLED_MODEL_TXT).expect("bundled model parses")
}
