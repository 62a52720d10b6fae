//! Reasoning gap on a directed chain: Sinkhorn-balanced transitions, both
//! closed-form risk minimizers, and the scaffolded expectation.

use locality_lab::theory::{
    chain_conditional, chain_marginal, random_chain, risk_minimizer, scaffolded_expectation, sinkhorn, Formulation,
};
use locality_lab::SeededRng;

fn main() -> locality_lab::Result<()> {
    let m = sinkhorn(vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0], vec![7.0, 8.0, 10.0]])?;
    for row in &m {
        println!("{row:.4?}");
    }
    let col: Vec<f64> = (0..3).map(|j| m.iter().map(|r| r[j]).sum()).collect();
    println!("column sums {col:.12?}");

    let chain = random_chain(6, 2, &mut SeededRng::new(3), true)?;
    let truth = chain_conditional(&chain, 5, 0, 1);
    for f in [Formulation::MarginalMixture, Formulation::UniformMixture] {
        let q = risk_minimizer(&chain, f, 1.0)?;
        let d = q.row(5, 0, 1);
        let s = scaffolded_expectation(&q, 5, 0, 1);
        println!(
            "{f}: truth {:.5}  direct {:.5} (bias2 {:.2e})  scaffolded {:.5} (bias2 {:.2e})",
            truth[1],
            d[1],
            (d[1] - truth[1]).powi(2),
            s[1],
            (s[1] - truth[1]).powi(2)
        );
    }

    let three = random_chain(3, 2, &mut SeededRng::new(8), false)?;
    let q = risk_minimizer(&three, Formulation::MarginalMixture, 0.0)?;
    let e = scaffolded_expectation(&q, 2, 0, 0);
    let p3 = chain_marginal(&three, 2);
    let c = chain_conditional(&three, 2, 0, 0);
    println!("3-chain: {:.6} = 3/4 * {:.6} + 1/4 * {:.6} = {:.6}", e[1], p3[1], c[1], 0.75 * p3[1] + 0.25 * c[1]);
    Ok(())
}
