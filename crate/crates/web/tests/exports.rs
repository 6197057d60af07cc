use wickgraph_web::{fc_table, kernel_curve, nc_partitions};

#[test]
fn fc_table_json() {
    let v: serde_json::Value = serde_json::from_str(&fc_table("relu", 4, 3, 1.0).unwrap()).unwrap();
    assert_eq!(v["m_rational"][3][3], "741/4096");
    assert!(fc_table("relu", 0, 3, 1.0).is_err());
    assert!(fc_table("tanh", 2, 1, 1.0).is_err());
}

#[test]
fn kernel_curve_linear_is_cosine() {
    let v: serde_json::Value = serde_json::from_str(&kernel_curve("linear", 2, 5).unwrap()).unwrap();
    let theta = v["theta"].as_array().unwrap();
    assert_eq!(theta.len(), 5);
    for (i, t) in theta.iter().enumerate() {
        let t = t.as_f64().unwrap();
        assert!((v["gp"][i].as_f64().unwrap() - t.cos()).abs() < 1e-12);
        assert!((v["ntk"][i].as_f64().unwrap() - 3.0 * t.cos()).abs() < 1e-12);
    }
    assert!(kernel_curve("relu", 1, 1).is_err());
}

#[test]
fn partitions_with_duals() {
    let v: serde_json::Value = serde_json::from_str(&nc_partitions(4).unwrap()).unwrap();
    let list = v.as_array().unwrap();
    assert_eq!(list.len(), 14);
    for p in list {
        assert_eq!(p["blocks"].as_array().unwrap().len() + p["dual"].as_array().unwrap().len(), 5);
    }
    assert!(nc_partitions(9).is_err());
}
