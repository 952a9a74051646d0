use super::ParameterStore;

/// Step size for central differences.
pub const DEFAULT_STEP: f64 = 1e-5;
/// Denominator floor so that two near-zero gradients compare as equal.
pub const RELATIVE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub checked: usize,
    pub max_rel_error: f64,
    pub worst: Option<(String, usize, f64, f64)>,
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(RELATIVE_FLOOR)
}

/// Compare analytic gradients against central differences.
///
/// `loss` must compute the scalar loss for the current parameter values and
/// accumulate its gradients into the store. For each parameter at most
/// `max_per_param` entries are probed, preferring entries with a non-zero
/// analytic gradient.
pub fn check_gradients<F>(
    store: &mut ParameterStore,
    mut loss: F,
    h: f64,
    max_per_param: usize,
) -> GradCheckReport
where
    F: FnMut(&mut ParameterStore) -> f64,
{
    store.zero_grad();
    loss(store);
    let analytic: Vec<(String, Vec<f64>)> = store
        .params()
        .map(|(n, p)| (n.to_string(), p.grad.data().to_vec()))
        .collect();
    store.zero_grad();

    let mut report = GradCheckReport {
        checked: 0,
        max_rel_error: 0.0,
        worst: None,
    };
    for (name, grad) in analytic {
        let mut probes: Vec<usize> = (0..grad.len()).filter(|&i| grad[i] != 0.0).collect();
        probes.truncate(max_per_param);
        probes.extend((0..grad.len()).filter(|&i| grad[i] == 0.0).take(2));
        for i in probes {
            let original = store.value(&name).data()[i];
            store.value_mut(&name).data_mut()[i] = original + h;
            let plus = loss(store);
            store.value_mut(&name).data_mut()[i] = original - h;
            let minus = loss(store);
            store.value_mut(&name).data_mut()[i] = original;
            store.zero_grad();
            let numeric = (plus - minus) / (2.0 * h);
            let err = relative_error(grad[i], numeric);
            report.checked += 1;
            if err > report.max_rel_error || report.worst.is_none() {
                report.max_rel_error = report.max_rel_error.max(err);
                if err >= report.max_rel_error {
                    report.worst = Some((name.clone(), i, grad[i], numeric));
                }
            }
        }
    }
    report
}
