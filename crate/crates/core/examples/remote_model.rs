//! The line-delimited JSON protocol: an exact model served over TCP and
//! queried through the remote client.

use std::io::BufReader;
use std::net::TcpListener;
use std::time::Duration;

use locality_lab::estimators::{direct, Query};
use locality_lab::graph::{assign_cpts, generate_dag};
use locality_lab::model::{serve, OracleModel, PromptState, RemoteModel, SequenceModel};
use locality_lab::{SeededRng, VariableId};

fn main() -> locality_lab::Result<()> {
    let net = assign_cpts(generate_dag(8, 9, &mut SeededRng::new(2))?, 0.5, 0.5, &mut SeededRng::new(3))?;
    let listener = TcpListener::bind("127.0.0.1:0")?;
    let addr = listener.local_addr()?.to_string();
    let served = net.clone();
    let server = std::thread::spawn(move || -> locality_lab::Result<()> {
        let (stream, _) = listener.accept()?;
        serve(&OracleModel::new(served), BufReader::new(stream.try_clone()?), stream)
    });

    let remote = RemoteModel::connect(&addr, Duration::from_secs(5))?.with_n_nodes(8);
    let local = OracleModel::new(net);
    let (a, b) = (VariableId::new(0), VariableId::new(7));
    let query = Query::new(a, true, b, true)?;
    println!("direct over the wire {:.6}, in process {:.6}", direct(&remote, &query)?, direct(&local, &query)?);
    let state = PromptState::new(b, vec![(a, true), (VariableId::new(3), false)])?;
    println!("prompt:\n{}", state.render(b));
    println!("p1 = {:.6}", remote.value_distribution(&state, b)?.p1);
    drop(remote);
    server.join().expect("server thread")?;
    Ok(())
}
