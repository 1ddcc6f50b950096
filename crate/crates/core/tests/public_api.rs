use octobundle::lattice::{read_field, write_field};
use octobundle::{
    decompose_torsion, energy, flow_step, make_unit_field, metric_from_phi, phi0, sigma, FlowState, Grid, Mode, OctField,
    Octonion, StepOutcome, StructureConstants, Tensor2, TorsionField, Vec7,
};
use proptest::prelude::*;

fn vec7() -> impl Strategy<Value = Vec7> {
    prop::array::uniform7(-1.0..1.0f64).prop_map(|a| Vec7::from_column_slice(&a))
}

fn unit() -> impl Strategy<Value = Octonion> {
    (-1.0..1.0f64, vec7()).prop_filter_map("near zero", |(re, im)| {
        let a = Octonion::new(re, im);
        (a.norm() > 1e-2).then(|| a / a.norm())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sigma_composes(u in unit(), w in unit()) {
        let sc = StructureConstants::standard();
        let phi = phi0();
        let lhs = sigma(&u, &sigma(&w, &phi).unwrap()).unwrap();
        let rhs = sigma(&sc.mul(&u, &w), &phi).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-10);
    }

    #[test]
    fn deformed_forms_keep_the_flat_metric(v in unit()) {
        let pm = metric_from_phi(&sigma(&v, &phi0()).unwrap());
        prop_assert!(pm.positive);
        prop_assert!((pm.metric - Tensor2::identity()).amax() < 1e-10);
    }

    #[test]
    fn torsion_parts_reassemble(entries in prop::collection::vec(-1.0..1.0f64, 49)) {
        let t = Tensor2::from_row_slice(&entries);
        let c = decompose_torsion(&t, &phi0());
        prop_assert!((c.reassemble(&phi0()) - t).amax() < 1e-12);
        prop_assert!((c.tau14.transpose() + c.tau14).amax() < 1e-12);
        prop_assert!((c.tau27.transpose() - c.tau27).amax() < 1e-12);
        prop_assert!(c.tau27.trace().abs() < 1e-12);
    }
}

#[test]
fn field_dump_roundtrip() {
    let g = Grid::from_one_based(8, &[2, 6]).unwrap();
    let v = make_unit_field(&g, &[Mode { axis: 5, freq: 2.0, amp: 0.4, dir: Vec7::x() }]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.bin");
    write_field(&path, &v).unwrap();
    assert_eq!(read_field(&path).unwrap(), v);
}

#[test]
fn accepted_steps_never_raise_the_energy() {
    let g = Grid::from_one_based(8, &[1, 4]).unwrap();
    let dir = Vec7::from_column_slice(&[0.0, 0.6, 0.0, 0.8, 0.0, 0.0, 0.0]);
    let w = make_unit_field(&g, &[Mode { axis: 0, freq: 1.0, amp: 0.1, dir }]).unwrap();
    let t = torsion_of(&w);
    let mut state = FlowState::new(OctField::constant(&g, Octonion::one()), &t, 0.0, 0).unwrap();
    for dt in [0.5, 0.05, 0.01, 2.0] {
        match flow_step(&state, &t, dt, 1e-12).unwrap() {
            StepOutcome::Accepted { state: next, .. } => {
                assert!(next.energy <= state.energy);
                assert!((energy(&next.v, &t).unwrap() - next.energy).abs() < 1e-14);
                next.v.check_unit(1e-12).unwrap();
                state = next;
            }
            StepOutcome::Stiff { .. } => panic!("stiff at dt {dt}"),
        }
    }
    assert!(state.step == 4);
}

fn torsion_of(w: &OctField) -> TorsionField {
    octobundle::torsion_of_gauge(w, &TorsionField::zero(&w.grid)).unwrap().torsion
}
