use minilp::{ComparisonOp, OptimizationDirection, Problem};

/// β(μ, ν) as a linear program over f on the pooled support:
/// maximize Σ (μᵢ − νᵢ) fᵢ with |fᵢ| ≤ s, |fᵢ − fⱼ| ≤ L|xᵢ − xⱼ|, s + L ≤ 1.
pub fn bl_lp(xs: &[f64], ys: &[f64]) -> f64 {
    let mut pts: Vec<(f64, f64)> = xs.iter().map(|x| (*x, 1.0 / xs.len() as f64)).collect();
    pts.extend(ys.iter().map(|y| (*y, -1.0 / ys.len() as f64)));
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let s = lp.add_var(0.0, (0.0, 1.0));
    let l = lp.add_var(0.0, (0.0, 1.0));
    lp.add_constraint([(s, 1.0), (l, 1.0)], ComparisonOp::Le, 1.0);
    let f: Vec<_> = pts.iter().map(|(_, w)| lp.add_var(*w, (-1.0, 1.0))).collect();
    for (i, fi) in f.iter().enumerate() {
        lp.add_constraint([(*fi, 1.0), (s, -1.0)], ComparisonOp::Le, 0.0);
        lp.add_constraint([(*fi, -1.0), (s, -1.0)], ComparisonOp::Le, 0.0);
        for j in i + 1..pts.len() {
            let d = (pts[i].0 - pts[j].0).abs();
            lp.add_constraint([(*fi, 1.0), (f[j], -1.0), (l, -d)], ComparisonOp::Le, 0.0);
            lp.add_constraint([(*fi, -1.0), (f[j], 1.0), (l, -d)], ComparisonOp::Le, 0.0);
        }
    }
    lp.solve().expect("bounded LP").objective()
}
