//! Variable elimination against full joint enumeration.

use locality_lab::graph::{assign_cpts, generate_dag};
use locality_lab::infer::{brute_force_joint, conditional, eliminate, marginal};
use locality_lab::{Assignment, SeededRng, VariableId};

fn main() -> locality_lab::Result<()> {
    let net = assign_cpts(generate_dag(10, 12, &mut SeededRng::new(4))?, 0.5, 0.5, &mut SeededRng::new(5))?;
    let joint = brute_force_joint(&net)?;
    let (a, b) = (VariableId::new(0), VariableId::new(9));

    let mut worst: f64 = 0.0;
    for value in [false, true] {
        let mut evidence = Assignment::new();
        evidence.insert(a, value);
        let ve = conditional(&net, b, true, &evidence)?;
        let brute = {
            let reduced = joint.reduce(&evidence);
            let mut f = reduced;
            for v in net.dag().nodes().filter(|v| *v != b && *v != a) {
                f = f.sum_out(v);
            }
            let f = f.sum_out(a).normalized();
            let mut one = Assignment::new();
            one.insert(b, true);
            f.value(&one)
        };
        worst = worst.max((ve - brute).abs());
        println!("p({b}=1 | {a}={}) = {ve:.6} (enumeration {brute:.6})", value as u8);
    }
    println!("p({b}=1) = {:.6}", marginal(&net, b)?);
    let f = eliminate(&net, &[a, b], &Assignment::new())?;
    println!("joint over {a},{b}: {:?}", f.table);
    println!("max disagreement {worst:.2e}");
    Ok(())
}
