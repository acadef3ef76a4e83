use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Result};
use hvacrl_core::training::{compare, TrainingConfig};

use crate::commands::{read_totals, Totals, BASELINE_FILE, EVALUATION_FILE};
use crate::manifest::{RunKind, RunManifest, RunStatus};
use crate::CompareArgs;

pub const COMPARE_HEADER: &str = "run,ratio_lambda,energy_savings_pct,complaints_ratio";

struct Setting {
    label: String,
    ratio_lambda: f64,
    savings: Vec<f64>,
    ratios: Vec<f64>,
}

/// Runs that differ only in their seed belong to the same setting.
fn setting_key(config: &TrainingConfig) -> Result<String> {
    let mut c = config.clone();
    c.seed = 0;
    Ok(serde_json::to_string(&c)?)
}

fn base_label(m: &RunManifest) -> String {
    match m.kind {
        RunKind::Baseline => "baseline".into(),
        RunKind::Train => format!("{}-R{}", m.pretraining, m.ratio_lambda),
    }
}

pub fn run(args: CompareArgs) -> Result<()> {
    let mut manifests = Vec::new();
    for dir in &args.runs {
        manifests.push((dir.clone(), RunManifest::read(dir)?));
    }

    let baseline_dir: Option<PathBuf> = args.baseline.clone().or_else(|| {
        manifests
            .iter()
            .find(|(_, m)| m.kind == RunKind::Baseline)
            .map(|(d, _)| d.clone())
    });
    let Some(baseline_dir) = baseline_dir.filter(|d| d.join(BASELINE_FILE).is_file()) else {
        bail!(
            "no baseline row found among the given runs; run `hvacrl baseline` with the same \
             config and pass its directory (or use --baseline)"
        );
    };
    let base = read_totals(&baseline_dir.join(BASELINE_FILE))?;

    let mut settings: BTreeMap<String, Setting> = BTreeMap::new();
    let mut order: Vec<String> = Vec::new();
    for (dir, m) in &manifests {
        let totals: Totals = match m.kind {
            RunKind::Baseline => read_totals(&dir.join(BASELINE_FILE))?,
            RunKind::Train => {
                if m.status != RunStatus::Completed {
                    bail!("{} did not complete (status {:?})", dir.display(), m.status);
                }
                read_totals(&dir.join(EVALUATION_FILE))?
            }
        };
        let c = compare((totals.e_total, totals.m_total), (base.e_total, base.m_total));
        let key = format!("{:?}|{}", m.kind, setting_key(&m.config)?);
        let entry = settings.entry(key.clone()).or_insert_with(|| {
            order.push(key.clone());
            Setting {
                label: base_label(m),
                ratio_lambda: m.ratio_lambda,
                savings: Vec::new(),
                ratios: Vec::new(),
            }
        });
        entry.savings.push(c.energy_savings_pct);
        entry.ratios.push(c.complaints_ratio);
    }

    let mut out: Box<dyn Write> = match &args.output {
        Some(path) => Box::new(std::fs::File::create(path)?),
        None => Box::new(std::io::stdout().lock()),
    };
    writeln!(out, "{COMPARE_HEADER}")?;
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for key in &order {
        let s = &settings[key];
        let n = seen.entry(s.label.clone()).or_insert(0);
        *n += 1;
        let label = if *n == 1 {
            s.label.clone()
        } else {
            format!("{}-{}", s.label, n)
        };
        writeln!(
            out,
            "{},{},{},{}",
            label,
            s.ratio_lambda,
            mean(&s.savings),
            mean(&s.ratios)
        )?;
    }
    out.flush()?;
    Ok(())
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}
