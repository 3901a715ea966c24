//! Invariants of the bundled map corpus.

use npsp_core::corpus;
use npsp_core::maze::{CellKind, DistanceField, MazeMap, Position};

fn goals(map: &MazeMap) -> Vec<Position> {
    let mut out = Vec::new();
    for y in 0..map.height() {
        for x in 0..map.width() {
            let pos = Position::new(x, y);
            if map.cell(pos) == CellKind::Goal {
                out.push(pos);
            }
        }
    }
    out
}

#[test]
fn all_maps_parse_and_reserialize_byte_exact() {
    for (name, doc) in corpus::ALL {
        let map = MazeMap::parse(doc).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(map.to_document(), doc, "{name} round trip");
    }
}

#[test]
fn by_name_resolves_every_bundled_map() {
    for (name, doc) in corpus::ALL {
        assert_eq!(corpus::by_name(name), Some(doc));
        assert_eq!(corpus::by_name(&name.to_uppercase()), Some(doc));
    }
    assert_eq!(corpus::by_name("no-such-map"), None);
}

#[test]
fn deceptive_maps_have_two_starts_and_172_first_room_cells() {
    for name in ["dm1", "dm2"] {
        let map = MazeMap::parse(corpus::by_name(name).unwrap()).unwrap();
        assert_eq!(map.width(), 23, "{name} width");
        assert_eq!(map.height(), 23, "{name} height");
        assert_eq!(map.starts().len(), 2, "{name} starts");
        assert_eq!(map.first_room_cells().len(), 172, "{name} first room");
    }
}

#[test]
fn every_map_has_a_valid_distance_field() {
    for (name, doc) in corpus::ALL {
        let map = MazeMap::parse(doc).unwrap();
        let field = DistanceField::compute(&map).unwrap();
        assert!(field.max_dist > 0, "{name} max_dist");
        assert!(field.door_distance > 0, "{name} door_distance");
        assert!(
            field.max_dist_second_room > 0,
            "{name} max_dist_second_room"
        );
        for (start, _) in map.starts() {
            assert!(field.at(*start) > field.door_distance, "{name} start depth");
        }
    }
}

#[test]
fn goal_sits_beyond_the_door_from_every_start() {
    for (name, doc) in corpus::ALL {
        let map = MazeMap::parse(doc).unwrap();
        let first_room = map.first_room_cells();
        let goals = goals(&map);
        assert!(!goals.is_empty(), "{name} has no goal");
        for goal in &goals {
            assert!(!first_room.contains(goal), "{name} goal in first room");
        }
        for (start, _) in map.starts() {
            assert!(first_room.contains(start), "{name} start not in first room");
        }
    }
}
