use std::time::Instant;
fn main() {
    let inst = aggrecast::instances::gen_uniform(3200, aggrecast::LogScalar::ONE, 1).unwrap();
    let t0 = Instant::now();
    let tree = aggrecast::mst::euclidean_mst(&inst.points).unwrap();
    println!("mst n=3200: {:?}", t0.elapsed());
    let links = aggrecast::mst::orient_to_sink(&tree, 0, &inst.points).unwrap();
    let t0 = Instant::now();
    let spec = aggrecast::conflict::ConflictSpec::power(2.0, 1.0/6.0).unwrap();
    let g = aggrecast::conflict::build_conflict_graph(&links, &spec);
    println!("conflict build n=3199: {:?} edges={}", t0.elapsed(), g.num_edges());
    let t0 = Instant::now();
    let classes = aggrecast::scheduler::refine_mst(&links, 3.0);
    println!("refine: {:?} t={}", t0.elapsed(), classes.len());
    let t0 = Instant::now();
    let s = aggrecast::scheduler::make_schedule(&links, aggrecast::scheduler::PowerMode::Oblivious{tau:0.5}, &inst.params, &Default::default()).unwrap();
    println!("make_schedule obl: {:?} slots={} gamma={}", t0.elapsed(), s.num_slots(), s.gamma);
    let t0 = Instant::now();
    let s2 = aggrecast::scheduler::make_schedule(&links, aggrecast::scheduler::PowerMode::Arbitrary, &inst.params, &Default::default()).unwrap();
    println!("make_schedule arb: {:?} slots={} gamma={}", t0.elapsed(), s2.num_slots(), s2.gamma);
    let delta = aggrecast::geom::link_length_diversity(&links).unwrap();
    println!("logstar={} loglog={:.2}", aggrecast::scheduler::log_star_of(delta), aggrecast::scheduler::log_log2_of(delta));
    let t0 = Instant::now();
    let nd = aggrecast::geom::node_length_diversity(&inst.points).unwrap();
    println!("node diversity: {:?} ln={:.2}", t0.elapsed(), nd.ln());
}
