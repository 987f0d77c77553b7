use junction_core::model::symmetric_example;
use junction_core::vertex::{beta_from_vector, low_temp_limit};
use junction_core::{
    builtin_example, Assignment, FermiWindow, Grid, GroupSelector, Junction, Method,
};
use nalgebra::DMatrix;
use num_complex::Complex64;

fn max_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Which projector annihilates the boundary value is fixed by the oracle:
/// on resonance the scattered boundary values `(I + S)` have no component
/// along `e0`, so the low-temperature condition is `P0 ψ = 0`, `P0⊥ ψ′ = 0`.
#[test]
fn low_temperature_pair_matches_the_oracle_on_resonance() {
    let j = Junction::prepare(&symmetric_example()).unwrap();
    let group = j
        .in_band_groups()
        .into_iter()
        .find(|g| g.labels.contains(&(3, 1)))
        .unwrap();
    let model = j.fit_resonance(group.group, GroupSelector::Full).unwrap();
    assert!((model.lambda0_f - 9.444127720428).abs() < 1e-9);

    let window = FermiWindow::new(model.lambda0_f, 1e-6).unwrap();
    let limit = low_temp_limit(&model, j.basis(), window, 0.1, Assignment::ResonanceLimit).unwrap();
    assert!(limit.valid);

    let s = j.s_oracle(model.lambda0_f).unwrap();
    let values = s.matrix.clone() + DMatrix::<Complex64>::identity(3, 3);
    let psi = limit.bc.psi.map(|x| Complex64::new(x, 0.0));
    let derivative = limit.bc.derivative.map(|x| Complex64::new(x, 0.0));
    assert!((&psi * &values).norm() < 1e-12);
    assert!((&derivative * &values).norm() > 1.0);

    let beta = beta_from_vector(&model.e0(), 1e-8).unwrap();
    assert!((beta - -0.17221916561792577).abs() < 1e-9);
}

#[test]
fn schur_route_flags_the_sealed_eigenvalue_and_the_oracle_does_not() {
    let j = Junction::prepare(&symmetric_example()).unwrap();
    let model = j
        .fit_resonance(j.in_band_groups()[3].group, GroupSelector::Full)
        .unwrap();
    assert!(j.s_exact(model.lambda0_f).is_err());
    let s = j.s_oracle(model.lambda0_f).unwrap();
    assert!(s.unitarity_defect() < 1e-10);
}

#[test]
fn finite_difference_pipeline_converges_to_the_analytic_one() {
    let mut spec = builtin_example();
    spec.solver.interior_modes = 40;
    let analytic = Junction::prepare(&spec).unwrap();
    let error = |divisions: f64| {
        let mut s = spec.clone();
        s.solver.grid = Grid::Spacing(std::f64::consts::PI / divisions);
        let fd = Junction::prepare(&s).unwrap();
        [6.3, 9.1, 11.7]
            .iter()
            .map(|&l| {
                let f = fd.s_exact(l).unwrap();
                assert!(f.unitarity_defect() < 1e-10);
                (analytic.s_exact(l).unwrap().transmission() - f.transmission()).amax()
            })
            .fold(0.0, f64::max)
    };
    let coarse = error(120.0);
    let fine = error(240.0);
    assert!(fine < 0.05, "{fine}");
    assert!(fine < coarse / 3.0, "{coarse} -> {fine}");
}

#[test]
fn weak_field_perturbs_smoothly() {
    let base = Junction::prepare(&{
        let mut s = builtin_example();
        s.solver.grid = Grid::Spacing(std::f64::consts::PI / 80.0);
        s.solver.interior_modes = 30;
        s
    })
    .unwrap();
    let mut spec = base.spec().clone();
    spec.well.field = [1e-3, 0.0];
    let tilted = Junction::prepare(&spec).unwrap();
    let a = base.s_exact(7.3).unwrap();
    let b = tilted.s_exact(7.3).unwrap();
    assert!(b.unitarity_defect() < 1e-10 && b.symmetry_defect() < 1e-10);
    let d = max_diff(&a.matrix, &b.matrix);
    assert!(d > 0.0 && d < 1e-2, "{d}");
}

#[test]
fn fd_data_agrees_with_the_oracle() {
    let mut spec = builtin_example();
    spec.solver.grid = Grid::Spacing(std::f64::consts::PI / 64.0);
    spec.solver.interior_modes = 30;
    spec.solver.closed_modes = 4;
    let j = Junction::prepare(&spec).unwrap();
    let grid = junction_core::pipeline::linear_grid(4.2, 15.8, 25);
    let sweep = j.sweep(&grid, Method::Exact).unwrap();
    for row in &sweep.rows {
        if let Some(s) = row.smatrix() {
            let o = j.s_oracle(row.lambda).unwrap();
            assert!(max_diff(&s.matrix, &o.matrix) < 1e-9, "λ = {}", row.lambda);
        }
    }
}
