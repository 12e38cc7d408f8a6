use super::*;
use crate::exact::{q, qi};
use crate::operators::DEFAULT_MAX_DIM;

fn a(n: u32) -> Alphabet {
    Alphabet::new(n).unwrap()
}

fn find<'a>(vs: &'a [Verdict], id: &str) -> &'a Verdict {
    vs.iter().find(|v| v.id == id).unwrap_or_else(|| panic!("missing verdict {id}"))
}

#[test]
fn verdict_status_and_witnesses() {
    let s = Scope::new(a(2), 1);
    let v = verdict("x", s.clone(), vec![Check::diff("a".into(), qi(1), qi(1))]);
    assert_eq!(v.status, Status::Verified);
    assert_eq!(v.witnesses[0].residual, "0");
    let v = verdict("x", s.clone(), vec![Check::diff("a".into(), qi(1), qi(1)), Check::diff("b".into(), qi(1), q(1, 2))]);
    assert_eq!(v.status, Status::Mixed);
    assert_eq!(v.witnesses[0].input, "b");
    assert_eq!(v.witnesses[0].residual, "-1/2");
    let v = verdict("x", s, (0..100).map(|i| Check::diff(i.to_string(), qi(0), qi(1))));
    assert_eq!(v.status, Status::Refuted);
    assert_eq!(v.witnesses.len(), MAX_WITNESSES);
}

#[test]
fn structural_suite_small() {
    for n in [2, 3] {
        let vs = structural_suite(a(n), 3, 200).unwrap();
        for v in &vs {
            assert!(v.verified(), "{} not verified: {:?}", v.id, v.witnesses.first());
        }
    }
}

#[test]
fn orthogonality_is_refuted_by_siblings() {
    let vs = basis_claims(a(3), 2, 200);
    let o = find(&vs, "defofbasis.orthogonality");
    assert_eq!(o.status, Status::Mixed);
    assert!(o.witnesses.iter().any(|w| w.residual == "-1/9"));
    let d = find(&vs, "herewedefine.dimension");
    // block (0,1): 9 labels, rank 8
    assert!(d.witnesses.iter().any(|w| w.input.contains("(0,1)") && w.paper == "9" && w.oracle == "8"));
}

#[test]
fn lemmab_third_case_witness() {
    let vs = adjudicate_volumes(a(3), 2).unwrap();
    let c3 = find(&vs, "lemmab.case3");
    assert_ne!(c3.status, Status::Verified);
    let w = c3.witnesses.iter().find(|w| w.input.contains("mu=1 nu=2 cell=21 ell=0")).unwrap();
    assert_eq!((w.paper.as_str(), w.oracle.as_str()), ("4/3", "1/3"));
    assert!(w.input.contains("exceeds sheet mass 2/3"));
    assert_eq!(find(&vs, "lemmab.case1").status, Status::Verified);
    assert_eq!(find(&vs, "lemmab.case2").status, Status::Verified);
}

#[test]
fn bigtcomp_examples() {
    let vs = adjudicate_t(a(3), 3, DEFAULT_MAX_DIM).unwrap();
    let d = find(&vs, "bigtcomp.diagonal");
    let w = d.witnesses.iter().find(|w| w.input == "N=3 e[1,2]").unwrap();
    assert_eq!((w.paper.as_str(), w.oracle.as_str(), w.residual.as_str()), ("1/6", "1/2", "1/3"));
    assert_eq!(find(&vs, "bigtcomp.offdiagonal").status, Status::Verified);
    let (diag, _) = paper::block_comparison(a(3), GradeIndex::new(1, 1).unwrap(), DEFAULT_MAX_DIM).unwrap();
    let (_, c) = diag.iter().find(|(b, _)| b.to_string() == "e[11,1]").unwrap();
    assert_eq!((c.paper.clone(), c.oracle.clone()), (q(3, 2), q(3, 2)));
}

#[test]
fn fit_finds_zero_and_nonzero_corrections() {
    let mut data = diagonal_discrepancies(a(3), 3, DEFAULT_MAX_DIM).unwrap();
    data.extend(diagonal_discrepancies(a(2), 4, DEFAULT_MAX_DIM).unwrap());
    let fock: Vec<DiagonalDatum> = data.iter().filter(|d| d.nu_len == 0).cloned().collect();
    let f = fit_correction(&fock);
    assert!(f.is_zero());
    assert_eq!(f.residual, "0");
    let same: Vec<DiagonalDatum> = data.iter().filter(|d| d.same_tail && d.kappa_v == 0).cloned().collect();
    assert!(same.iter().all(|d| d.discrepancy.is_zero()));
    let f = fit_correction(&data);
    assert_eq!(f.residual, "0");
    let class = f.classes.iter().find(|c| c.class == "t(mu)!=t(nu), kappa_v>0, mu0!=∅").unwrap();
    assert_eq!(class.terms, vec![FitTerm { name: "1/N".into(), coefficient: "1".into() }]);
}

#[test]
fn report_json_is_stable() {
    let vs = adjudicate_volumes(a(2), 2).unwrap();
    let r = Report::new(a(2), 2, vs.clone());
    let s1 = r.to_json();
    let s2 = Report::new(a(2), 2, adjudicate_volumes(a(2), 2).unwrap()).to_json();
    assert_eq!(s1, s2);
    let v: serde_json::Value = serde_json::from_str(&s1).unwrap();
    assert_eq!(v["meta"]["N"], 2);
    let first = &v["verdicts"][0];
    for key in ["id", "status", "scope", "witnesses"] {
        assert!(first.get(key).is_some());
    }
    for key in ["input", "paper", "oracle", "residual"] {
        assert!(first["witnesses"][0].get(key).is_some());
    }
}
