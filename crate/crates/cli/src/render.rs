//! Deterministic SVG overlays for 2D artifacts.

use std::fmt::Write;

use vb_core::construction::GenerationTree;
use vb_core::{DomainMask, Error};

/// Overlay layers, drawn in the given order above the mask.
#[derive(Clone, Debug)]
pub enum Layer<'a> {
    /// One circle per selected ball, grouped by generation, plus boundary points.
    Tree(&'a GenerationTree),
    /// Cell-index polylines.
    Paths(&'a [Vec<usize>]),
    /// Boundary cells marked visible.
    Visible(&'a [usize]),
}

/// Renders the mask (one unit per cell, y up) and overlays.
pub fn render_svg(mask: &DomainMask<f64>, layers: &[Layer<'_>]) -> Result<String, Error> {
    let space = mask.space();
    if space.dim() != 2 {
        return Err(Error::Unsupported3D);
    }
    let [nx, ny, _] = space.extent();
    let h = space.h();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {nx} {ny}\" width=\"{nx}\" height=\"{ny}\">"
    );
    let _ = writeln!(out, "<rect id=\"background\" x=\"0\" y=\"0\" width=\"{nx}\" height=\"{ny}\" fill=\"#222222\"/>");
    let _ = writeln!(out, "<g id=\"mask\" fill=\"#f4f1ea\">");
    for y in 0..ny {
        let row = ny - 1 - y;
        let mut x = 0;
        while x < nx {
            if !mask.is_inside(space.index([x, y, 0])) {
                x += 1;
                continue;
            }
            let start = x;
            while x < nx && mask.is_inside(space.index([x, y, 0])) {
                x += 1;
            }
            let _ = writeln!(out, "<rect x=\"{start}\" y=\"{row}\" width=\"{}\" height=\"1\"/>", x - start);
        }
    }
    let _ = writeln!(out, "</g>");
    let px = |i: usize| {
        let c = space.coord(i);
        (c[0] as f64 + 0.5, (ny - 1 - c[1]) as f64 + 0.5)
    };
    for (k, layer) in layers.iter().enumerate() {
        match layer {
            Layer::Tree(tree) => {
                for (level, ids) in tree.levels.iter().enumerate() {
                    let _ = writeln!(
                        out,
                        "<g id=\"layer{k}-gen{level}\" fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"0.5\">"
                    );
                    for &id in ids {
                        let n = &tree.nodes[id];
                        let (x, y) = px(n.seed);
                        let _ = writeln!(
                            out,
                            "<circle id=\"ball-{id}\" cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"{:.3}\"/>",
                            n.radius / h
                        );
                    }
                    let _ = writeln!(out, "</g>");
                }
                let _ = writeln!(out, "<g id=\"layer{k}-points\" fill=\"#c0392b\">");
                for n in &tree.nodes {
                    let (x, y) = px(n.omega);
                    let _ = writeln!(out, "<circle id=\"point-{}\" cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"1.5\"/>", n.id);
                }
                let _ = writeln!(out, "</g>");
            }
            Layer::Paths(paths) => {
                let _ = writeln!(out, "<g id=\"layer{k}-paths\" fill=\"none\" stroke=\"#27ae60\" stroke-width=\"0.4\">");
                for (p, cells) in paths.iter().enumerate() {
                    let pts: Vec<String> = cells
                        .iter()
                        .map(|&i| {
                            let (x, y) = px(i);
                            format!("{x:.1},{y:.1}")
                        })
                        .collect();
                    let _ = writeln!(out, "<polyline id=\"path-{p}\" points=\"{}\"/>", pts.join(" "));
                }
                let _ = writeln!(out, "</g>");
            }
            Layer::Visible(cells) => {
                let _ = writeln!(out, "<g id=\"layer{k}-visible\" fill=\"#e67e22\">");
                for &i in cells.iter() {
                    let c = space.coord(i);
                    let _ = writeln!(out, "<rect x=\"{}\" y=\"{}\" width=\"1\" height=\"1\"/>", c[0], ny - 1 - c[1]);
                }
                let _ = writeln!(out, "</g>");
            }
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use vb_core::construction::{run_construction, ConstructionConfig, EtaBound};
    use vb_core::domaingen::{generate, DomainKind, DomainSpec};
    use vb_core::gridspace::field::distance_to_complement;
    use vb_core::GridSpace;

    fn disk() -> DomainMask<f64> {
        generate(&DomainSpec { kind: DomainKind::Disk { radius: 1.0 }, h: 1.0 / 128.0 }).unwrap()
    }

    #[test]
    fn empty_layers_draw_only_the_mask() {
        let svg = render_svg(&disk(), &[]).unwrap();
        assert!(svg.contains("id=\"mask\""));
        assert!(!svg.contains("<circle"));
        assert_eq!(svg, render_svg(&disk(), &[]).unwrap());
    }

    #[test]
    fn tree_overlay_has_one_circle_per_ball() {
        let m = disk();
        let d = distance_to_complement(&m);
        let z0 = m.space().locate(&[0.0, 0.0]).unwrap();
        let cfg = ConstructionConfig { eta_bound: EtaBound::Report, ..Default::default() };
        let tree = run_construction(&m, &d, z0, 0.125, 1, &cfg).unwrap();
        let svg = render_svg(&m, &[Layer::Tree(&tree)]).unwrap();
        assert_eq!(svg.matches("<circle id=\"ball-").count(), tree.nodes.len());
        assert_eq!(svg, render_svg(&m, &[Layer::Tree(&tree)]).unwrap());
    }

    #[test]
    fn three_dimensional_masks_are_rejected() {
        let s = GridSpace::new(3, &[4, 4, 4], 1.0, &[0.0; 3]).unwrap();
        let inside = (0..s.len()).map(|i| !s.is_world_boundary(i)).collect();
        let m = DomainMask::new(s, inside).unwrap();
        assert!(matches!(render_svg(&m, &[]), Err(Error::Unsupported3D)));
    }
}
