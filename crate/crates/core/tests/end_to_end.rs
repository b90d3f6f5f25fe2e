use psmm::bilinear::{load_scheme, save_scheme, strassen_scheme, OperatorChoice};
use psmm::linalg::random_matrix;
use psmm::privacy::{
    assert_secret_independence, enumerate_view_distribution, postprocessing_invariance, Independence, DEFAULT_BUDGET,
};
use psmm::protocol::{run_protocol, run_protocol_detailed, ProtocolConfig};
use psmm::sharing::SharingParams;
use psmm::{matmul_naive, FieldMatrix, FieldSpec, MultCounter, RngStream};

const SHIPPED: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/schemes/strassen.scheme");

fn secrets(f: FieldSpec, m: usize, seed: u64) -> (FieldMatrix, FieldMatrix) {
    let mut rng = RngStream::derive(seed, "e2e", 0);
    (random_matrix(f, m, m, &mut rng), random_matrix(f, m, m, &mut rng))
}

#[test]
fn shipped_scheme_drives_the_protocol() {
    let f = FieldSpec::mersenne31();
    let vs = load_scheme(SHIPPED, f).unwrap();
    assert_eq!(vs.rank(), 7);
    let (a, b) = secrets(f, 16, 1);
    let params = SharingParams::new(16, 2, 3).unwrap();
    let cfg = ProtocolConfig::new(params, f, 3).with_operator(OperatorChoice::scheme("strassen", vs, 2));
    let (c, transcript) = run_protocol(&cfg, &a, &b).unwrap();
    assert_eq!(c, matmul_naive(&a.transpose(), &b, &mut MultCounter::new()).unwrap());
    assert!(transcript.agents.iter().all(|ag| ag.mults.base_products == 49));
}

#[test]
fn saved_scheme_reloads_in_another_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("copy.scheme");
    save_scheme(&path, &strassen_scheme()).unwrap();
    assert_eq!(
        std::fs::read_to_string(&path).unwrap(),
        std::fs::read_to_string(SHIPPED).unwrap()
    );
    let vs = load_scheme(&path, FieldSpec::new(101).unwrap()).unwrap();
    assert_eq!(vs.field().modulus(), 101);
}

#[test]
fn three_party_threshold_audit_over_f3() {
    let f = FieldSpec::new(3).unwrap();
    let params = SharingParams::new(2, 2, 3).unwrap();
    let points: Vec<_> = (1..=2).map(|x| f.element(x)).collect();
    let (a1, b1) = secrets(f, 2, 10);
    let (a2, b2) = (a1.add(&FieldMatrix::identity(f, 2)).unwrap(), b1.clone());

    for coalition in [vec![0], vec![1], vec![0, 1]] {
        let d = enumerate_view_distribution(params, f, &a1, &b1, &coalition, &points, DEFAULT_BUDGET).unwrap();
        assert_eq!(d.total, 3u64.pow(8));
        assert!(d.is_uniform(f), "coalition {coalition:?}");
        let r =
            assert_secret_independence(params, f, (&a1, &b1), (&a2, &b2), &coalition, &points, DEFAULT_BUDGET).unwrap();
        assert_eq!(r, Independence::Independent);
    }
}

#[test]
fn operator_audit_after_a_real_run() {
    let f = FieldSpec::mersenne31();
    let (a, b) = secrets(f, 8, 4);
    let cfg = ProtocolConfig::new(SharingParams::new(8, 2, 2).unwrap(), f, 1)
        .with_operator(OperatorChoice::strassen(f, 2).unwrap());
    let run = run_protocol_detailed(&cfg, &a, &b).unwrap();
    postprocessing_invariance(&OperatorChoice::Dense, &run.shares, &run.results).unwrap();
    postprocessing_invariance(&cfg.operator, &run.shares, &run.results).unwrap();
}
