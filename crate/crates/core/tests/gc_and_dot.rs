use graphviz_rust::dot_structures::{Graph, Id, NodeId, Stmt};
use hamdd::dd::dot::DiagramObject;
use hamdd::models::trotter_step_circuit;
use hamdd::{Complex, Config, Manager, ModelSpec, Root};

fn parse_counts(dot: &str) -> (Vec<String>, usize) {
    let g = graphviz_rust::parse(dot).expect("valid DOT");
    let Graph::DiGraph { stmts, .. } = g else { panic!("expected a digraph") };
    let mut nodes = Vec::new();
    let mut edges = 0;
    for s in stmts {
        match s {
            Stmt::Node(n) => {
                let NodeId(Id::Plain(name), _) = n.id else { panic!("plain node ids") };
                nodes.push(name);
            }
            Stmt::Edge(_) => edges += 1,
            _ => {}
        }
    }
    (nodes, edges)
}

#[test]
fn dot_parses_for_zero_state() {
    let mut m = Manager::default();
    let s = m.basis_state(&[0]).unwrap();
    let (nodes, edges) = parse_counts(&m.dot_string(s.root));
    assert_eq!(nodes.iter().filter(|n| *n != "root").count(), 2);
    assert_eq!(edges, 2);
}

#[test]
fn dot_parses_for_three_site_example() {
    let a = 1.0 / (2.0 * 2f64.sqrt());
    let amps = [a, a, 0.5, 0.0, a, a, 0.5, 0.0].map(|x| Complex::new(x, 0.0));
    let mut m = Manager::default();
    let s = m.from_amplitudes(&amps).unwrap();
    let dot = m.dot_string(s.root);
    let (nodes, edges) = parse_counts(&dot);
    assert_eq!(nodes.iter().filter(|n| *n != "root").count(), 5);
    assert_eq!(edges, 8);
    assert!(dot.contains("0.707107+0i"));
}

#[test]
fn every_diagram_object_exports_valid_dot() {
    for text in ["basis 0110", "ghz 4", "w 3", "rxx pi/2", "ryy 0.3 0 3 5", "rzz -pi/4 2 1 3", "rz pi 1 2", "sz(0) 3", "sxsx(0,2) 3"] {
        let mut m = Manager::default();
        let obj: DiagramObject = text.parse().unwrap();
        let root = obj.build(&mut m).unwrap();
        let mut buf = Vec::new();
        m.export_dot(root, &mut buf).unwrap();
        let (nodes, _) = parse_counts(std::str::from_utf8(&buf).unwrap());
        assert_eq!(nodes.len(), m.node_count(root) + 2, "{text}");
    }
}

#[test]
fn collection_frees_only_unreferenced_nodes() {
    let mut m = Manager::default();
    let a = m.ghz_state(6).unwrap();
    let b = m.w_state(6).unwrap();
    m.retain(a.root);
    m.retain(b.root);
    m.garbage_collect();
    let live = m.stored_vector_nodes();
    assert_eq!(m.garbage_collect().vector_nodes_freed, 0);
    assert_eq!(m.stored_vector_nodes(), live);

    m.release(b.root);
    let stats = m.garbage_collect();
    assert!(stats.vector_nodes_freed > 0);
    assert_eq!(m.stored_vector_nodes(), m.node_count(a.root));
    assert_eq!(m.ghz_state(6).unwrap(), a);
    m.check_invariants().unwrap();
}

#[test]
fn live_nodes_track_reachability_while_stepping() {
    let model = ModelSpec::heisenberg(7, 1.0, 0.5);
    let circuit = trotter_step_circuit(&model, 0.2).unwrap();
    let mut m = Manager::new(Config { gc_threshold: 500, ..Config::default() });
    let mut s = m.zero_state(7).unwrap();
    m.retain(s.root);
    for _ in 0..15 {
        let next = m.apply_circuit(&s, &circuit).unwrap();
        m.retain(next.root);
        m.release(s.root);
        s = next;
        m.maybe_collect();
        m.check_invariants().unwrap();
    }
    m.garbage_collect();
    assert_eq!(m.stored_vector_nodes(), m.node_count(s.root));
    let root: Root = s.root.into();
    assert_eq!(m.node_count(root), m.node_count(s.root));
    m.check_invariants().unwrap();
}
