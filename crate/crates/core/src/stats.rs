/// Geometric decay rate `r` from a least-squares fit of `ln e_n = a + n ln r`.
///
/// Points with non-positive or non-finite error are dropped. Returns `None`
/// when fewer than two usable points remain.
pub fn fit_geometric_rate(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, e)| e.is_finite() && *e > 0.0)
        .map(|&(n, e)| (n, e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    Some((sxy / sxx).exp())
}
