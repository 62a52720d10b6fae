use super::*;
use crate::graph::{assign_cpts, generate_dag, Cpt, VariableId};
use crate::model::{fit_empirical, OracleModel};
use crate::obsdist::{ObservationMode, ObservationSpec, RadiusDistribution};
use crate::pipeline::{generate_corpus, ranked_pairs};

fn x(i: usize) -> VariableId {
    VariableId::new(i)
}

fn net(n: usize, e: usize, seed: u64) -> BayesNet {
    let dag = generate_dag(n, e, &mut SeededRng::new(seed)).unwrap();
    assign_cpts(dag, 0.2, 0.2, &mut SeededRng::new(seed + 1)).unwrap()
}

fn ctx<'a>(net: &'a BayesNet, condition: &'a str) -> EvalContext<'a> {
    EvalContext {
        net_id: 0,
        condition,
        net,
        corpus_tokens_seen: None,
    }
}

fn check_record(r: &EstimateRecord) {
    if let Some(e) = r.estimate {
        assert!((0.0..=1.0).contains(&e));
        assert_eq!(r.squared_error_true, Some((e - r.true_conditional).powi(2)));
        assert_eq!(r.squared_error_marginal, Some((e - r.marginal).powi(2)));
    } else {
        assert!(r.error.is_some());
    }
}

#[test]
fn four_queries_per_pair() {
    let qs = queries_for_pair(&HeldOutPair::new(x(1), x(2), 0.3));
    let got: Vec<_> = qs.iter().map(|q| (q.target, q.observed, q.observed_value, q.target_value)).collect();
    assert_eq!(
        got,
        vec![
            (x(1), x(2), false, true),
            (x(1), x(2), true, true),
            (x(2), x(1), false, true),
            (x(2), x(1), true, true),
        ]
    );
}

#[test]
fn oracle_harness_self_test() {
    let net = net(12, 14, 3);
    let pairs: Vec<_> = ranked_pairs(&net).unwrap().into_iter().take(5).collect();
    let oracle = OracleModel::new(net.clone());
    let params = EvalParams::default();
    let ev = evaluate(&oracle, &ctx(&net, "oracle"), &pairs, &params, 1).unwrap();
    assert_eq!(ev.records.len() + 4 * ev.skipped.len(), 20 * 4);
    for r in &ev.records {
        check_record(r);
        match r.estimator {
            EstimatorKind::Direct => assert!(r.squared_error_true.unwrap() < 1e-20),
            EstimatorKind::Scaffolded => assert_eq!(r.trace_d_separates, Some(1.0)),
            EstimatorKind::Free => assert!(r.error.as_deref().unwrap().contains("not supported")),
            EstimatorKind::NegativeScaffolded => {
                assert!(r.estimate.is_some() || r.error.as_deref().unwrap().contains("eligible variables"))
            }
        }
    }
    let table = summarize(&ev.records, 200, 0);
    assert_eq!(table.row("oracle", EstimatorKind::Direct).unwrap().mse_true.unwrap(), 0.0);
    let free = table.row("oracle", EstimatorKind::Free).unwrap();
    assert_eq!((free.n, free.errors, free.mse_true), (0, 20, None));
}

#[test]
fn zero_probability_evidence_is_skipped() {
    // X0 is always 0
    let dag = Dag::from_edges(3, &[(x(0), x(1)), (x(1), x(2))]).unwrap();
    let cpts = vec![
        Cpt::new(x(0), vec![], vec![0.0]).unwrap(),
        Cpt::new(x(1), vec![x(0)], vec![0.3, 0.9]).unwrap(),
        Cpt::new(x(2), vec![x(1)], vec![0.2, 0.7]).unwrap(),
    ];
    let net = BayesNet::new(dag, cpts).unwrap();
    let params = EvalParams {
        estimators: vec![EstimatorKind::Direct, EstimatorKind::Scaffolded],
        ..Default::default()
    };
    let ev = evaluate(&OracleModel::new(net.clone()), &ctx(&net, "c"), &[HeldOutPair::new(x(0), x(2), 0.0)], &params, 0).unwrap();
    assert_eq!(ev.skipped.len(), 1);
    assert_eq!(ev.skipped[0].query.observed, x(0));
    assert!(ev.skipped[0].query.observed_value);
    assert_eq!(ev.skipped[0].reason, "zero_probability_evidence");
    assert_eq!(ev.records.len(), 3 * 2);
}

#[test]
fn empty_trace_on_adjacent_pair() {
    let net = net(8, 10, 5);
    let (a, b) = net.dag().edges()[0];
    let q = Query::new(a, true, b, true).unwrap();
    let t = Trace { records: vec![], p1: 0.5 };
    let expected = d_separated(net.dag(), a, b, &[]) as u8 as f64;
    assert_eq!(d_separation_rate(net.dag(), [(&q, &t)]), Some(expected));
    assert_eq!(d_separation_rate(net.dag(), std::iter::empty()), None);
}

fn local_corpus(net: &BayesNet, pairs: &[HeldOutPair], n: usize) -> Vec<Sample> {
    let spec = ObservationSpec {
        mode: ObservationMode::Local,
        locality_graph: net.dag().clone(),
        radius: RadiusDistribution::geometric(0.5).unwrap(),
        dropout: 0.2,
        held_out: pairs.to_vec(),
    };
    generate_corpus(net, &spec, n, 11).unwrap()
}

#[test]
fn empirical_run_is_deterministic_across_thread_counts() {
    let net = net(12, 12, 9);
    let pairs: Vec<_> = ranked_pairs(&net).unwrap().into_iter().take(3).collect();
    let corpus = local_corpus(&net, &pairs, 5000);
    let model = fit_empirical(corpus.iter().cloned().map(Ok), 12, 1.0, 50).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| evaluate(&model, &ctx(&net, "local"), &pairs, &EvalParams::default(), 7).unwrap())
    };
    let a = run(1);
    assert_eq!(a, run(3));
    assert_eq!(a.records.len(), 12 * 4);
    for r in &a.records {
        check_record(r);
        assert!(r.error.is_none(), "{r:?}");
    }
    let mut csv = Vec::new();
    write_records_csv(&a.records, &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("net_id,condition,estimator,query_index,observed,observed_value,target,target_value,estimate,"));
    assert_eq!(text.lines().count(), 49);
}

#[test]
fn bootstrap_properties() {
    let values: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin().abs()).collect();
    let a = bootstrap_ci(&values, 2000, &mut SeededRng::new(3)).unwrap();
    let b = bootstrap_ci(&values, 2000, &mut SeededRng::new(3)).unwrap();
    assert_eq!(a, b);
    assert!(a.1 <= a.0 && a.0 <= a.2 && a.1 < a.2);
    assert_eq!(bootstrap_ci(&[0.25; 10], 100, &mut SeededRng::new(1)), Some((0.25, 0.25, 0.25)));
    assert_eq!(bootstrap_ci(&[], 100, &mut SeededRng::new(1)), None);
}

#[test]
fn prefix_fits_match_recount() {
    let net = net(10, 10, 2);
    let corpus = local_corpus(&net, &[], 400);
    let lens: Vec<u64> = corpus.iter().map(|s| serialized_len(s) as u64).collect();
    let total: u64 = lens.iter().sum();
    let budgets = [lens[0] - 1, total / 3, total / 2, total, total * 2];
    let fits = prefix_fits(corpus.iter().cloned().map(Ok), &budgets, 10, 1.0, 50).unwrap();
    assert_eq!(fits.len(), 5);
    assert_eq!(fits[0].samples, 0);
    for f in &fits {
        let recount = fit_empirical(corpus[..f.samples].iter().cloned().map(Ok), 10, 1.0, 50).unwrap();
        assert_eq!(f.model, recount);
        assert_eq!(f.characters, lens[..f.samples].iter().sum::<u64>());
        assert!(f.characters <= f.budget);
        if f.samples < corpus.len() {
            assert!(f.characters + lens[f.samples] > f.budget);
        }
    }
    assert_eq!(fits[3].samples, 400);
    assert!(prefix_fits(std::iter::empty(), &[5, 5], 10, 1.0, 50).is_err());
}

#[test]
fn full_budget_curve_equals_plain_evaluation() {
    let net = net(10, 10, 4);
    let pairs: Vec<_> = ranked_pairs(&net).unwrap().into_iter().take(2).collect();
    let corpus = local_corpus(&net, &pairs, 2000);
    let params = EvalParams::default();
    let curve = learning_curve(corpus.iter().cloned().map(Ok), &[u64::MAX], &ctx(&net, "local"), &pairs, &params, (1.0, 50), 5).unwrap();
    let model = fit_empirical(corpus.iter().cloned().map(Ok), 10, 1.0, 50).unwrap();
    let plain = evaluate(&model, &ctx(&net, "local"), &pairs, &params, 5).unwrap();
    let strip = |rs: &[EstimateRecord]| rs.iter().map(|r| (r.estimator, r.estimate)).collect::<Vec<_>>();
    assert_eq!(strip(&curve.records), strip(&plain.records));
    let seen = corpus.iter().map(|s| serialized_len(s) as u64).sum::<u64>();
    assert!(curve.records.iter().all(|r| r.corpus_tokens_seen == Some(seen)));
}

#[test]
fn sweep_runs_direct_once() {
    let net = net(10, 12, 6);
    let pairs: Vec<_> = ranked_pairs(&net).unwrap().into_iter().take(2).collect();
    let oracle = OracleModel::new(net.clone());
    let params = EvalParams {
        estimators: vec![EstimatorKind::Direct, EstimatorKind::Scaffolded],
        ..Default::default()
    };
    let ev = sample_count_sweep(&oracle, &ctx(&net, "oracle"), &pairs, &params, &[1, 100], 3).unwrap();
    let count = |k, m| ev.records.iter().filter(|r| r.estimator == k && r.m == m).count();
    assert_eq!(count(EstimatorKind::Direct, 1), 8);
    assert_eq!(count(EstimatorKind::Scaffolded, 1), 8);
    assert_eq!(count(EstimatorKind::Scaffolded, 100), 8);
    let table = summarize(&ev.records, 500, 1);
    let mse = |m| table.rows.iter().find(|r| r.estimator == EstimatorKind::Scaffolded && r.m == m).unwrap().mse_true.unwrap();
    assert!(mse(1) > mse(100));
    let mut buf = Vec::new();
    write_plot_csv(&table, &mut buf).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with("condition,estimator,m,tokens,mse,ci_lo,ci_hi\n"));
}

#[test]
fn estimator_names_round_trip() {
    for k in EstimatorKind::ALL {
        assert_eq!(k.to_string().parse::<EstimatorKind>().unwrap(), k);
    }
    assert!("cot".parse::<EstimatorKind>().is_err());
}
