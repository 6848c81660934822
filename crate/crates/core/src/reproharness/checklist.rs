//! The four-criterion reproducibility checklist. All four are necessary
//! for the "exactly reproducible" verdict.

use super::manifest::Manifest;
use serde::Serialize;

/// Availability of the two code artifacts, supplied by the caller (the
/// CLI ships both search and evaluation in one binary and passes `true`;
/// audits of external artifacts can pass what they find).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodePresence {
    pub search_code: bool,
    pub evaluation_code: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Checklist {
    pub search_code: bool,
    pub evaluation_code: bool,
    pub random_seeds: bool,
    pub tuning_docs: bool,
}

impl Checklist {
    pub fn exactly_reproducible(&self) -> bool {
        self.search_code && self.evaluation_code && self.random_seeds && self.tuning_docs
    }
}

/// Fills the checklist from the manifest and the code availability:
/// seeds require both a master seed and a recorded stream ledger.
pub fn checklist_report(manifest: &Manifest, code: CodePresence) -> Checklist {
    Checklist {
        search_code: code.search_code,
        evaluation_code: code.evaluation_code,
        random_seeds: manifest.master_seed.is_some() && !manifest.stream_labels.is_empty(),
        tuning_docs: manifest.tuning_docs.is_some(),
    }
}

fn yn(b: bool) -> &'static str {
    if b {
        "Yes"
    } else {
        "No"
    }
}

/// Renders the checklist as a table row in the survey style.
pub fn render_checklist(checklist: &Checklist) -> String {
    let verdict = if checklist.exactly_reproducible() {
        "exactly reproducible"
    } else {
        "not exactly reproducible"
    };
    format!(
        "Architecture Search Code | Model Evaluation Code | Random Seeds | Hyperparameter Tuning Docs | Verdict\n\
         {:>24} | {:>21} | {:>12} | {:>26} | {verdict}\n",
        yn(checklist.search_code),
        yn(checklist.evaluation_code),
        yn(checklist.random_seeds),
        yn(checklist.tuning_docs),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn manifest(seeds: bool, tuning: bool) -> Manifest {
        Manifest {
            artifact_version: "0".into(),
            mode: "pipeline".into(),
            config: BTreeMap::new(),
            master_seed: seeds.then_some(3),
            stream_labels: if seeds { vec!["x".into()] } else { vec![] },
            space: String::new(),
            input_genotypes: vec![],
            output_genotypes: vec![],
            tuning_docs: tuning.then(|| "README.md".to_string()),
            records_digest: String::new(),
            content_hash: String::new(),
        }
        .seal()
    }

    const CODE: CodePresence = CodePresence { search_code: true, evaluation_code: true };

    #[test]
    fn complete_manifest_all_yes() {
        let c = checklist_report(&manifest(true, true), CODE);
        assert!(c.exactly_reproducible());
        assert!(render_checklist(&c).contains("exactly reproducible"));
    }

    #[test]
    fn missing_seeds_fails_verdict() {
        let c = checklist_report(&manifest(false, true), CODE);
        assert!(!c.random_seeds);
        assert!(!c.exactly_reproducible());
        assert!(render_checklist(&c).contains("not exactly reproducible"));
    }

    #[test]
    fn missing_tuning_docs_flagged() {
        let c = checklist_report(&manifest(true, false), CODE);
        assert!(!c.tuning_docs);
        assert!(!c.exactly_reproducible());
    }
}
