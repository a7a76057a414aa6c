use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use relacc_core::meshgen::{generate_mesh, mesh_statistics, Mesh, MeshError, MeshParams};

fn on_boundary(p: [f64; 2]) -> bool {
    p[0] == 0.0 || p[0] == 1.0 || p[1] == 0.0 || p[1] == 1.0
}

fn same_side(a: [f64; 2], b: [f64; 2]) -> bool {
    (a[0] == 0.0 && b[0] == 0.0)
        || (a[0] == 1.0 && b[0] == 1.0)
        || (a[1] == 0.0 && b[1] == 0.0)
        || (a[1] == 1.0 && b[1] == 1.0)
}

fn angle_deg(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    let u = [b[0] - a[0], b[1] - a[1]];
    let v = [c[0] - a[0], c[1] - a[1]];
    let cos = (u[0] * v[0] + u[1] * v[1]) / (u[0].hypot(u[1]) * v[0].hypot(v[1]));
    cos.clamp(-1.0, 1.0).acos().to_degrees()
}

/// Exhaustive check of every mesh invariant, written independently of the
/// generator.
fn validate(mesh: &Mesh, params: &MeshParams) {
    let v = mesh.vertices();
    for corner in [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]] {
        assert!(v.contains(&corner), "corner {corner:?} missing");
    }
    for p in v {
        assert!((0.0..=1.0).contains(&p[0]) && (0.0..=1.0).contains(&p[1]));
    }

    let mut area = 0.0;
    let mut diameter = 0.0f64;
    let mut edges: BTreeMap<(usize, usize), Vec<bool>> = BTreeMap::new();
    for t in mesh.triangles() {
        let [a, b, c] = t.map(|i| v[i]);
        let twice = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        assert!(twice > 0.0, "triangle {t:?} is not counterclockwise");
        area += 0.5 * twice;
        for (p, q, r) in [(a, b, c), (b, c, a), (c, a, b)] {
            let angle = angle_deg(p, q, r);
            assert!(
                angle >= params.min_angle_deg - 1e-9,
                "angle {angle} below {}",
                params.min_angle_deg
            );
            let d = (q[0] - p[0]).hypot(q[1] - p[1]);
            diameter = diameter.max(d);
        }
        for (i, j) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            edges.entry((i.min(j), i.max(j))).or_default().push(i < j);
        }
    }
    assert!((area - 1.0).abs() <= 1e-12, "area sum {area}");
    assert!((mesh.h_actual() - diameter).abs() <= 1e-15);
    assert!(mesh.h_actual() <= params.h_max);

    for (&(i, j), orientations) in &edges {
        match orientations.as_slice() {
            [_] => {
                assert!(
                    on_boundary(v[i]) && on_boundary(v[j]) && same_side(v[i], v[j]),
                    "edge {i}-{j} used once but not on the boundary"
                );
            }
            [x, y] => assert_ne!(x, y, "edge {i}-{j} has equal orientations"),
            _ => panic!("edge {i}-{j} shared by more than two triangles"),
        }
    }

    // no vertex may sit inside an edge it does not belong to
    for (&(i, j), _) in &edges {
        let (a, b) = (v[i], v[j]);
        let len2 = (b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2);
        for (n, p) in v.iter().enumerate() {
            if n == i || n == j {
                continue;
            }
            let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
            let t = ((p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1])) / len2;
            assert!(
                !(cross.abs() <= 1e-14 && t > 0.0 && t < 1.0),
                "hanging vertex {n} on edge {i}-{j}"
            );
        }
    }

    let boundary: BTreeSet<usize> = (0..v.len()).filter(|&i| on_boundary(v[i])).collect();
    let reported: BTreeSet<usize> = mesh.boundary_vertices().iter().copied().collect();
    assert_eq!(boundary, reported);
}

#[test]
fn coarsest_mesh_is_two_triangles() {
    let params = MeshParams::new(1.5, 0);
    let mesh = generate_mesh(&params).unwrap();
    assert_eq!(mesh.num_triangles(), 2);
    assert_eq!(mesh.num_vertices(), 4);
    assert_eq!(mesh.h_actual(), 2f64.sqrt());
    validate(&mesh, &params);
    let stats = mesh_statistics(&mesh);
    assert_eq!(stats.num_triangles, 2);
    assert!((stats.min_angle_deg - 45.0).abs() < 1e-12);
}

#[test]
fn structured_half_mesh_respects_the_size_bound() {
    let params = MeshParams::new(0.5, 7);
    let mesh = generate_mesh(&params).unwrap();
    validate(&mesh, &params);
    for t in 0..mesh.num_triangles() {
        let p = mesh.triangle_points(t);
        for (a, b) in [(0, 1), (1, 2), (2, 0)] {
            assert!((p[a][0] - p[b][0]).hypot(p[a][1] - p[b][1]) <= 0.5);
        }
    }
    assert_eq!(mesh.num_vertices(), 16);
    assert_eq!(mesh.num_triangles(), 18);
}

#[test]
fn jittered_fine_mesh_passes_the_validator() {
    let params = MeshParams::new(0.1, 1).with_jitter(0.3);
    let mesh = generate_mesh(&params).unwrap();
    validate(&mesh, &params);
    let stats = mesh_statistics(&mesh);
    assert!(stats.min_angle_deg >= params.min_angle_deg);
    assert_eq!(stats.h_actual, mesh.h_actual());
    assert!(stats.max_aspect_ratio >= 1.0);
}

#[test]
fn generation_is_deterministic() {
    let params = MeshParams::new(0.15, 99).with_jitter(0.3);
    assert_eq!(generate_mesh(&params).unwrap(), generate_mesh(&params).unwrap());
}

#[test]
fn seeds_change_the_mesh() {
    let a = generate_mesh(&MeshParams::new(0.2, 1).with_jitter(0.3)).unwrap();
    let b = generate_mesh(&MeshParams::new(0.2, 2).with_jitter(0.3)).unwrap();
    assert_ne!(a.vertices(), b.vertices());
}

#[test]
fn hundred_seeds_give_distinct_vertex_sets() {
    let mut sets = BTreeSet::new();
    for seed in 0..100 {
        let mesh = generate_mesh(&MeshParams::new(0.1, seed).with_jitter(0.3)).unwrap();
        let key: Vec<[u64; 2]> = mesh
            .vertices()
            .iter()
            .map(|p| [p[0].to_bits(), p[1].to_bits()])
            .collect();
        sets.insert(key);
    }
    assert!(sets.len() >= 99, "only {} distinct vertex sets", sets.len());
}

#[test]
fn invalid_parameters_are_rejected() {
    assert!(matches!(
        generate_mesh(&MeshParams::new(0.0, 0)),
        Err(MeshError::InvalidMeshSize(_))
    ));
    assert!(generate_mesh(&MeshParams::new(f64::NAN, 0)).is_err());
    assert!(matches!(
        generate_mesh(&MeshParams::new(0.2, 0).with_jitter(0.5)),
        Err(MeshError::InvalidJitter { .. })
    ));
    assert!(generate_mesh(&MeshParams::new(0.2, 0).with_jitter(-0.1)).is_err());
    assert!(generate_mesh(&MeshParams::new(0.2, 0).with_min_angle(0.0)).is_err());
    assert!(generate_mesh(&MeshParams::new(0.2, 0).with_min_angle(60.0)).is_err());
}

#[test]
fn unreachable_quality_floor_fails_after_repair() {
    let err = generate_mesh(&MeshParams::new(0.2, 3).with_min_angle(50.0)).unwrap_err();
    assert!(matches!(err, MeshError::Quality { .. }), "{err:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn random_parameters_give_valid_meshes(
        h in 0.08f64..0.6,
        seed in any::<u64>(),
        jitter in 0.0f64..0.45,
    ) {
        let params = MeshParams::new(h, seed).with_jitter(jitter);
        let mesh = generate_mesh(&params).unwrap();
        validate(&mesh, &params);
    }
}
