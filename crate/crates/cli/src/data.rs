use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::Args;
use flrank::dataset::orders_to_comparisons;
use flrank::{io, ComparisonDataset, FeatureSet, PreferenceMatrix, Ranking};

use crate::error::{CliError, CliResult};

/// Where a dataset lives: features plus either pair counts or raw orders.
#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Features CSV (`item_id,f_1,..,f_d`).
    #[arg(long)]
    pub features: PathBuf,
    /// Comparisons CSV (`i,j,wins_i,trials`).
    #[arg(long, conflicts_with = "orders", required_unless_present = "orders")]
    pub comparisons: Option<PathBuf>,
    /// Orders CSV, one best-first order per line.
    #[arg(long)]
    pub orders: Option<PathBuf>,
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::at(path, e))
}

pub fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::at(path, e))
}

impl DataArgs {
    pub fn load(&self) -> CliResult<ComparisonDataset> {
        let features = io::read_features(open(&self.features)?).map_err(|e| CliError::at(&self.features, e))?;
        match (&self.comparisons, &self.orders) {
            (Some(path), _) => io::read_comparisons(open(path)?, features).map_err(|e| CliError::at(path, e)),
            (None, Some(path)) => {
                let orders = io::read_orders(open(path)?).map_err(|e| CliError::at(path, e))?;
                orders_to_comparisons(&orders, &features).map_err(|e| CliError::at(path, e))
            }
            (None, None) => Err(CliError::Usage("either --comparisons or --orders is required".into())),
        }
    }
}

pub fn load_truth(path: &Path) -> CliResult<PreferenceMatrix> {
    let m = io::read_matrix(open(path)?).map_err(|e| CliError::at(path, e))?;
    PreferenceMatrix::new(m).map_err(|e| CliError::at(path, e))
}

pub fn load_ranking(path: &Path) -> CliResult<Ranking> {
    io::read_ranking(open(path)?).map_err(|e| CliError::at(path, e))
}

pub fn save_features(path: &Path, features: &FeatureSet) -> CliResult<()> {
    let mut out = create(path)?;
    io::write_features(features, &mut out)?;
    Ok(out.flush()?)
}

pub fn save_comparisons(path: &Path, data: &ComparisonDataset) -> CliResult<()> {
    let mut out = create(path)?;
    io::write_comparisons(data, &mut out)?;
    Ok(out.flush()?)
}
