//! Property tests for the engine's cross-cutting invariants.

use proptest::prelude::*;

use funscene::arrange::{select_part, Selection, SpatialQuery};
use funscene::asset::FunctionalElement;
use funscene::geom::{Aabb3, Vec2, Vec3};
use funscene::index::{ensemble_score, EmbeddingIndex};
use funscene::layout::{parse_clause_line, render_clause, Clause, ClauseKind, WallSide};
use funscene::llm::parse_structured_block;
use funscene::parts::normalize_centroids;

fn elements_strategy() -> impl Strategy<Value = Vec<FunctionalElement>> {
    prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 1..8).prop_map(|coords| {
        coords
            .into_iter()
            .enumerate()
            .map(|(i, (x, y))| {
                FunctionalElement::new(format!("p{i}"), "handle".to_string(), Vec2::new(x, y))
                    .unwrap()
            })
            .collect()
    })
}

proptest! {
    // Mirroring all X coordinates swaps leftmost/rightmost answers and
    // converts nth-from-left into nth-from-right.
    #[test]
    fn mirror_symmetry_swaps_horizontal_queries(elements in elements_strategy(), n in 1u32..4) {
        let mirrored: Vec<FunctionalElement> = elements
            .iter()
            .map(|e| {
                FunctionalElement::new(
                    e.part_id.clone(),
                    e.enriched_label.clone(),
                    Vec2::new(1.0 - e.centroid2.x, e.centroid2.y),
                )
                .unwrap()
            })
            .collect();
        let pairs = [
            (SpatialQuery::Leftmost, SpatialQuery::Rightmost),
            (SpatialQuery::NthFromLeft(n), SpatialQuery::NthFromRight(n)),
        ];
        for (query, flipped) in pairs {
            let a = select_part("x", &elements, &query, 0.05).unwrap();
            let b = select_part("x", &mirrored, &flipped, 0.05).unwrap();
            match (a, b) {
                (Selection::Chosen(sa), Selection::Chosen(sb)) => {
                    prop_assert_eq!(sa.part_id, sb.part_id);
                }
                (Selection::Unsuitable(_), Selection::Unsuitable(_)) => {}
                (a, b) => prop_assert!(false, "asymmetric outcomes {:?} vs {:?}", a, b),
            }
        }
    }

    // Cosine is scale-invariant, so the ensemble score must not move under
    // positive rescaling of either query vector. Power-of-two scales keep
    // the f32 components exact, isolating the algebraic property from
    // storage rounding.
    #[test]
    fn ensemble_invariant_to_positive_rescaling(
        seed_entry in prop::collection::vec(-1.0f32..1.0, 8),
        seed_query in prop::collection::vec(-1.0f32..1.0, 8),
        exponent in -8i32..=8,
    ) {
        prop_assume!(seed_entry.iter().any(|v| v.abs() > 1e-3));
        prop_assume!(seed_query.iter().any(|v| v.abs() > 1e-3));
        let mut index = EmbeddingIndex::new(8);
        index.insert("e", &seed_entry, &seed_entry).unwrap();
        let entry = index.entry(0);
        let base = ensemble_score(&seed_query, &seed_query, entry, 0.5).unwrap();
        let scale = 2.0f32.powi(exponent);
        let scaled: Vec<f32> = seed_query.iter().map(|v| v * scale).collect();
        let got = ensemble_score(&scaled, &seed_query, entry, 0.5).unwrap();
        prop_assert!((got - base).abs() < 1e-9, "{} vs {}", got, base);
    }

    // Centroid normalization is invariant to uniform scaling and
    // translation of the asset.
    #[test]
    fn normalization_invariant_to_similarity_transforms(
        cx in -0.4f64..0.4, cy in -0.2f64..0.2, cz in 0.05f64..0.95,
        k in 0.1f64..10.0, tx in -5.0f64..5.0, ty in -5.0f64..5.0, tz in -5.0f64..5.0,
    ) {
        let part = funscene::asset::PartNode {
            part_id: "p".into(),
            label: "handle".into(),
            centroid3: Vec3::new(cx, cy, cz),
            aabb: Aabb3::new(Vec3::new(cx - 0.01, cy - 0.01, cz - 0.01), Vec3::new(cx + 0.01, cy + 0.01, cz + 0.01)),
            mask_ref: None,
            children: Vec::new(),
        };
        let bbox = Aabb3::new(Vec3::new(-0.5, -0.3, 0.0), Vec3::new(0.5, 0.3, 1.0));
        let base = normalize_centroids(&[&part], &bbox, Vec2::new(0.0, 1.0)).unwrap();
        let shift = Vec3::new(tx, ty, tz);
        let moved = funscene::asset::PartNode {
            centroid3: part.centroid3 * k + shift,
            aabb: Aabb3::new(part.aabb.min * k + shift, part.aabb.max * k + shift),
            ..part.clone()
        };
        let moved_bbox = Aabb3::new(bbox.min * k + shift, bbox.max * k + shift);
        let got = normalize_centroids(&[&moved], &moved_bbox, Vec2::new(0.0, 1.0)).unwrap();
        prop_assert!((base[0].x - got[0].x).abs() < 1e-9);
        prop_assert!((base[0].y - got[0].y).abs() < 1e-9);
    }

    // The structured-block parser never panics, whatever the model replies.
    #[test]
    fn doc_parser_total_on_arbitrary_input(raw in ".{0,400}") {
        let _ = parse_structured_block(&raw);
    }

    // Clause DSL rendering and parsing are inverse.
    #[test]
    fn clause_dsl_round_trips(
        subject in "[a-z]{1,10}",
        reference in "[a-z]{1,10}",
        kind_pick in 0usize..9,
        soft in proptest::bool::ANY,
        weight in 0.1f64..10.0,
        wall_pick in 0usize..5,
    ) {
        let reference = if reference == subject { format!("{reference}x") } else { reference };
        let kind = match kind_pick {
            0 => ClauseKind::Central,
            1 => ClauseKind::Corner,
            2 => ClauseKind::AgainstWall {
                wall: match wall_pick {
                    0 => Some(WallSide::North),
                    1 => Some(WallSide::East),
                    2 => Some(WallSide::South),
                    3 => Some(WallSide::West),
                    _ => None,
                },
            },
            3 => ClauseKind::LeftOf { reference },
            4 => ClauseKind::RightOf { reference },
            5 => ClauseKind::InFrontOf { reference },
            6 => ClauseKind::Behind { reference },
            7 => ClauseKind::Near { reference },
            _ => ClauseKind::OnTopOf { reference },
        };
        let clause = if soft {
            Clause::soft(&subject, kind, weight)
        } else {
            Clause::hard(&subject, kind)
        };
        let line = render_clause(&clause);
        let back = parse_clause_line(&line).unwrap();
        prop_assert_eq!(clause, back);
    }

    // Core domain types serialize and deserialize to identity.
    #[test]
    fn clause_serde_round_trips(subject in "[a-z]{1,8}", weight in 0.1f64..9.0) {
        let clause = Clause::soft(&subject, ClauseKind::Near { reference: "bed".into() }, weight);
        let json = serde_json::to_string(&clause).unwrap();
        let back: Clause = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(clause, back);
    }
}
