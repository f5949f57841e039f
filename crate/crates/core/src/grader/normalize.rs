use crate::model::NormalizationSpec;

pub fn normalize(text: &str, spec: &NormalizationSpec) -> String {
    let mut out = if spec.case_fold {
        text.to_lowercase()
    } else {
        text.to_string()
    };
    if spec.collapse_internal_whitespace {
        let mut collapsed = String::with_capacity(out.len());
        let mut in_ws = false;
        for c in out.chars() {
            if c.is_whitespace() {
                if !in_ws {
                    collapsed.push(' ');
                }
                in_ws = true;
            } else {
                collapsed.push(c);
                in_ws = false;
            }
        }
        out = collapsed;
    }
    if spec.trim {
        out = out.trim().to_string();
    }
    out
}
