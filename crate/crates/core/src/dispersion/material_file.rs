//! Material file reader and writer.
//!
//! ```text
//! name = congruent LN
//! lambda_min_nm = 400
//! lambda_max_nm = 2000
//! t_ref_K = 294.15
//!
//! [ordinary]
//! form = sellmeier_um
//! coefficients = 1.0, 2.6734, 0.01764, 1.2290, 0.05914, 12.614, 474.60
//! dn_dT = 3.3e-6
//!
//! [extraordinary]
//! table = 400:2.29, 600:2.23, 800:2.17, 1000:2.16
//! interpolation = cubic
//! ```
//!
//! A branch is either closed-form (`form` + `coefficients`) or tabulated
//! (`table`, optionally `interpolation`, default cubic). `dn_dT` defaults to
//! zero. `table` may be repeated to continue a long table over several lines.

use std::fmt::Write as _;
use std::path::Path;

use super::{BranchModel, DispersionError, IndexBranch, Interpolation, MaterialDispersion, SellmeierForm};
use crate::kvfile::{KvDocument, Section};

const BRANCH_KEYS: [&str; 5] = ["form", "coefficients", "dn_dT", "table", "interpolation"];
const TOP_KEYS: [&str; 4] = ["name", "lambda_min_nm", "lambda_max_nm", "t_ref_K"];

pub fn load_material(path: impl AsRef<Path>) -> Result<MaterialDispersion, DispersionError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| DispersionError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_material(&text)
}

pub fn parse_material(text: &str) -> Result<MaterialDispersion, DispersionError> {
    let doc = KvDocument::parse_with_repeatable(text, &["table"])?;
    for section in doc.sections() {
        let allowed: &[&str] = match section.name.as_str() {
            "" => &TOP_KEYS,
            "ordinary" | "extraordinary" => &BRANCH_KEYS,
            other => {
                return Err(DispersionError::invalid(
                    other,
                    format!("unknown section [{other}] on line {}", section.line),
                ))
            }
        };
        if let Some(key) = section.keys().find(|k| !allowed.contains(k)) {
            return Err(section.value_error(key, "unknown key").into());
        }
    }
    let top = doc.top();
    let name = top.str("name")?.to_string();
    let lambda_min: f64 = top.parse("lambda_min_nm")?;
    let lambda_max: f64 = top.parse("lambda_max_nm")?;
    let t_ref: f64 = top.parse("t_ref_K")?;
    let ordinary = parse_branch(doc.require_section("ordinary")?)?;
    let extraordinary = parse_branch(doc.require_section("extraordinary")?)?;
    MaterialDispersion::new(name, ordinary, extraordinary, (lambda_min, lambda_max), t_ref)
}

fn parse_branch(section: &Section) -> Result<IndexBranch, DispersionError> {
    let dn_dt = section.parse_or("dn_dT", 0.0)?;
    let with_field = |e: DispersionError| match e {
        DispersionError::Invalid { field, message } => DispersionError::Invalid {
            field: format!("{}.{field}", section.name),
            message,
        },
        other => other,
    };
    if section.contains("table") {
        if section.contains("coefficients") {
            return Err(section
                .value_error("table", "a branch has either `table` or `coefficients`, not both")
                .into());
        }
        if let Some(form) = section.get("form") {
            if form.value != "table" {
                return Err(section.value_error("form", "tabulated branch must omit `form` or use `table`").into());
            }
        }
        let points = section.f64_pairs("table")?;
        let interpolation: Interpolation = section.parse_or("interpolation", Interpolation::default())?;
        IndexBranch::tabulated(&points, interpolation, dn_dt).map_err(with_field)
    } else {
        let form: SellmeierForm = section.parse("form")?;
        let coefficients = section.f64_list("coefficients")?;
        IndexBranch::closed(form, coefficients, dn_dt).map_err(with_field)
    }
}

impl MaterialDispersion {
    /// Serializes to the material-file grammar; [`parse_material`] reads it back
    /// to an equal model (floats use shortest round-trip formatting).
    pub fn to_material_file(&self) -> String {
        let (lo, hi) = self.valid_range();
        let mut out = String::new();
        let _ = writeln!(out, "name = {}", self.name);
        let _ = writeln!(out, "lambda_min_nm = {lo:?}");
        let _ = writeln!(out, "lambda_max_nm = {hi:?}");
        let _ = writeln!(out, "t_ref_K = {:?}", self.reference_temperature());
        for (label, branch) in [("ordinary", &self.ordinary), ("extraordinary", &self.extraordinary)] {
            let _ = writeln!(out, "\n[{label}]");
            match &branch.model {
                BranchModel::Closed { form, coefficients } => {
                    let _ = writeln!(out, "form = {form}");
                    let list: Vec<String> = coefficients.iter().map(|c| format!("{c:?}")).collect();
                    let _ = writeln!(out, "coefficients = {}", list.join(", "));
                }
                BranchModel::Tabulated(table) => {
                    let _ = writeln!(out, "interpolation = {}", table.interpolation());
                    let pts: Vec<_> = table.points().collect();
                    for chunk in pts.chunks(8) {
                        let row: Vec<String> = chunk.iter().map(|(x, y)| format!("{x:?}:{y:?}")).collect();
                        let _ = writeln!(out, "table = {}", row.join(", "));
                    }
                }
            }
            let _ = writeln!(out, "dn_dT = {:?}", branch.dn_dt);
        }
        out
    }
}
