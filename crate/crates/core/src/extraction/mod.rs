//! Extraction of edge-disjoint 2-rays and double rays around a thin end.

mod refine;
mod shaping;
mod strands;
mod two_rays;
mod window;

pub use refine::{
    align_shapes_external, refine_same_shape_internal, select_allowed, Alignment, GeneratorLevels, LevelSource,
    Refinement, SelectedLevel, ShapeTable, ShapeTableExport,
};
pub use shaping::{shaping_select, Shaping, ShapingSelection};
pub use strands::{
    assemble_strands, check_parity, check_strand_degrees, extract_ray, Crossing, ParityReport, Strand, StrandReport,
};
pub use two_rays::{
    connectors_for_two_rays, double_rays_at, double_rays_stream, extract_two_rays_at, two_rays_stream,
    two_rays_to_double_rays, ConnectorPlan, DoubleRayTrace, PlanEntry, StrandAudit, TwoRayTrace, CONNECTOR_REACH,
};
pub use window::Window;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{canonical_generator, instance};
    use serde_json::json;

    #[test]
    fn ladder_strands_give_rays() {
        let g = instance("thick_ladder", &json!({})).unwrap();
        let gen = canonical_generator("thick_ladder", &json!({})).unwrap().unwrap();
        let start = std::time::Instant::now();
        let win = Window::capture(&g, 0, 120).unwrap();
        let h = win.horizon();
        let refined = refine_same_shape_internal(GeneratorLevels::new(&gen, h), &win).unwrap();
        let align = align_shapes_external(&refined.table);
        let selected = select_allowed(&refined, &align, &win).unwrap();
        let strands = assemble_strands(&refined, &selected, &win).unwrap();
        eprintln!(
            "seps {} levels {} kept {:?} pairs {:?} in {:?}",
            win.len(),
            refined.levels(),
            refined.table.kept(),
            align.pairs,
            start.elapsed()
        );
        assert!(strands.len() >= 5);
        for (s, t) in &strands[..5] {
            for x in [s, t] {
                let rep = check_strand_degrees(x);
                assert!(rep.passed(), "{:?}", rep.violations);
                assert!(check_parity(x).holds);
                let ray = extract_ray(x).unwrap();
                assert!(ray.len() > 10);
            }
        }
    }

    #[test]
    fn ladder_double_rays_extend() {
        let g = instance("thick_ladder", &json!({})).unwrap();
        let gen = canonical_generator("thick_ladder", &json!({})).unwrap().unwrap();
        let start = std::time::Instant::now();
        let (streams, cp, trace) = double_rays_stream(&g, 0, &gen, 10, 300).unwrap();
        let t1 = start.elapsed();
        let low: Vec<_> = streams.iter().map(|d| d.at(300)).collect();
        let high: Vec<_> = streams.iter().map(|d| d.at(600)).collect();
        eprintln!("first {:?}, both {:?}, stalls {}", t1, start.elapsed(), cp.stalls());
        eprintln!("seps {:?}", trace.plan.entries.iter().map(|e| e.separator).collect::<Vec<_>>());
        for (a, b) in low.iter().zip(&high) {
            assert!(a.is_simple() && b.is_simple());
            assert!(b.extends(a));
            assert!(b.vertices().len() > a.vertices().len());
        }
        assert!(crate::rays::pairwise_edge_disjoint(high.iter().map(|p| p.edges())));
    }

    #[test]
    #[ignore]
    fn phase_timing() {
        let g = instance("thick_ladder", &json!({})).unwrap();
        let gen = canonical_generator("thick_ladder", &json!({})).unwrap().unwrap();
        for h in [300usize, 600] {
            let t = std::time::Instant::now();
            let b = g.ball(h).unwrap();
            eprintln!("h {h} ball {:?} ({} vertices)", t.elapsed(), b.graph.vertex_count());
            let win = Window::capture(&g, 0, h).unwrap();
            eprintln!("capture {:?}", t.elapsed());
            let refined = refine_same_shape_internal(GeneratorLevels::new(&gen, h), &win).unwrap();
            eprintln!("refine {:?} levels {}", t.elapsed(), refined.levels());
            let align = align_shapes_external(&refined.table);
            let selected = select_allowed(&refined, &align, &win).unwrap();
            eprintln!("select {:?}", t.elapsed());
            let strands = assemble_strands(&refined, &selected, &win).unwrap();
            eprintln!("strands {:?}", t.elapsed());
            let rays: Vec<_> = strands.iter().take(12).map(|(s, t)| [extract_ray(s).unwrap(), extract_ray(t).unwrap()]).collect();
            eprintln!("rays {:?}", t.elapsed());
            let plan = connectors_for_two_rays(&win, &rays, 10).unwrap();
            eprintln!("plan {:?} {}", t.elapsed(), plan.entries.len());
        }
    }
}
