use ordermill::baselines::random_order;
use ordermill::bdd::evaluate_order;
use ordermill::bdd::oracle::mbdd_count;
use ordermill::model::parse_bench;

const S27: &str = "\
# 4 inputs
# 1 outputs
# 3 D-type flipflops
# 2 inverters
# 8 gates (1 ANDs + 1 NANDs + 2 ORs + 4 NORs)

INPUT(G0)
INPUT(G1)
INPUT(G2)
INPUT(G3)

OUTPUT(G17)

G5 = DFF(G10)
G6 = DFF(G11)
G7 = DFF(G13)

G14 = NOT(G0)
G17 = NOT(G11)

G8 = AND(G14, G6)

G15 = OR(G12, G8)
G16 = OR(G3, G8)

G9 = NAND(G16, G15)

G10 = NOR(G14, G11)
G11 = NOR(G5, G9)
G12 = NOR(G1, G7)
G13 = NOR(G2, G12)
";

#[test]
fn s27_has_one_variable_per_input_and_flip_flop() {
    let m = parse_bench(S27).unwrap();
    assert_eq!(m.num_vars(), 7);
    assert_eq!(m.num_state_vars(), 3);
    for name in ["G0", "G1", "G2", "G3", "G5", "G6", "G7"] {
        assert!(m.lookup(name).is_some(), "{name}");
    }
}

#[test]
fn s27_counts_match_the_oracle() {
    let m = parse_bench(S27).unwrap();
    for seed in 0..50 {
        let o = random_order(&m, seed);
        assert_eq!(evaluate_order(&m, &o).unwrap().node_count, mbdd_count(&m, &o).unwrap());
    }
}
