use std::fmt::Write as _;

use ufl_core::rounding::{RoundingDiagnostics, UnifactorReport};
use ufl_core::verification::LemmaStatus;

/// Named pass/fail lines for `verify`.
#[derive(Default)]
pub struct Checks {
    rows: Vec<(String, LemmaStatus, String)>,
}

impl Checks {
    pub fn push(&mut self, name: &str, ok: bool, detail: String) {
        let st = if ok { LemmaStatus::Pass } else { LemmaStatus::Fail };
        self.rows.push((name.to_string(), st, detail));
    }

    pub fn push_status(&mut self, name: &str, st: LemmaStatus, detail: String) {
        self.rows.push((name.to_string(), st, detail));
    }

    pub fn failed(&self) -> bool {
        self.rows.iter().any(|r| r.1 == LemmaStatus::Fail)
    }

    pub fn to_tsv(&self) -> String {
        let mut s = String::from("check\tstatus\tdetail\n");
        for (n, st, d) in &self.rows {
            let _ = writeln!(s, "{n}\t{}\t{d}", st.as_str());
        }
        s
    }
}

pub fn client_probabilities(d: &RoundingDiagnostics) -> String {
    let mut s = String::from("client\tp_close\tp_distant\tp_far\n");
    for j in 0..d.p_close.len() {
        let _ = writeln!(s, "{j}\t{}\t{}\t{}", d.p_close[j], d.p_distant[j], d.p_far[j]);
    }
    let _ = writeln!(s, "# trials {} mean_cost {} std_error {}", d.trials, d.mean_cost, d.std_error);
    s
}

pub fn unifactor_trials(r: &UnifactorReport) -> String {
    let mut s = String::from("trial\tgamma\tpath\tcost\n");
    for (t, tr) in r.trials.iter().enumerate() {
        let g = tr.gamma.map_or("-".to_string(), |g| g.to_string());
        let _ = writeln!(s, "{t}\t{g}\t{}\t{}", tr.path.as_str(), tr.cost);
    }
    s
}
