use fbns::grid::Grid;
use fbns::solver2d::*;
use fbns::Error;

fn fixture(dt: f64, times: &[f64]) -> (Vec<TimeWindow>, InteriorMask) {
    let g = Grid::new(2, 128, 2.0).unwrap();
    let w0 = gaussian_vortex(g, [0.3, 0.0], 0.1).unwrap();
    let centers: Vec<usize> = times.iter().map(|t| (t / dt).round() as usize).collect();
    let win = sample_windows(&VorticityState::new(w0, 0.0).unwrap(), dt, &centers).unwrap();
    (win, InteriorMask::disk(&g, 0.9).unwrap())
}

#[test]
fn rotated_frame_residual_converges_at_second_order() {
    let times = [0.15, 0.175, 0.2];
    let (coarse, mask) = fixture(1e-3, &times);
    let (fine, _) = fixture(2.5e-4, &times);
    let a = residual_4_5(&coarse, 5.0, &mask).unwrap();
    let b = residual_4_5(&fine, 5.0, &mask).unwrap();
    let order = (a.max_residual / b.max_residual).ln() / 4f64.ln();
    assert!(a.max_residual <= 1e-4);
    assert!(order >= 1.8);

    let zero = residual_4_5(&coarse, 0.0, &mask).unwrap();
    assert!(zero.max_residual <= 1e-4);

    let scaled: Vec<TimeWindow> = coarse.iter().map(|w| w.map_in_time(|t| 1.0 + t)).collect();
    let bad = residual_4_5(&scaled, 5.0, &mask).unwrap();
    assert!(bad.max_residual > 0.1, "{bad:?}");
}

#[test]
fn early_data_is_flagged_near_the_edge() {
    let g = Grid::new(2, 64, 1.0).unwrap();
    let w0 = gaussian_vortex(g, [0.3, 0.0], 0.5).unwrap();
    let win = sample_windows(&VorticityState::new(w0, 0.0).unwrap(), 1e-3, &[5]).unwrap();
    let mask = InteriorMask::disk(&g, 0.9).unwrap();
    assert!(matches!(residual_4_5(&win, 5.0, &mask), Err(Error::SupportAtMaskBoundary(_))));
}
